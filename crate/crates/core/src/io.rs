//! File formats shared by the CLI.
//!
//! Every file is pretty-printed JSON with keys in sorted order and a
//! `version` field; saving a loaded file reproduces it byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cn::{self, CnState};
use crate::diagram::CoxeterDiagram;
use crate::error::{Error, Result};
use crate::free::{ConstructionState, ProgressMetrics, RoundReport, TaskRecord};
use crate::geometry::Geometry;
use crate::properties;
use crate::verdict::Verdict;

pub const FORMAT_VERSION: u32 = 1;

/// Canonical text of a value: sorted keys, two-space indent, trailing
/// newline, plus the format version for objects.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("value serializes");
    if let Value::Object(map) = &mut v {
        map.insert("version".into(), FORMAT_VERSION.into());
    }
    let mut text = serde_json::to_string_pretty(&v).expect("value serializes");
    text.push('\n');
    text
}

/// Parses a file, checking and stripping its optional `version` field.
pub fn from_versioned_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let mut v: Value = serde_json::from_str(text)?;
    if let Value::Object(map) = &mut v {
        if let Some(version) = map.remove("version") {
            if version != FORMAT_VERSION {
                return Err(Error::Format(format!(
                    "unsupported format version {version}"
                )));
            }
        }
    }
    Ok(serde_json::from_value(v)?)
}

fn read(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

fn write(path: &Path, text: &str) -> Result<()> {
    Ok(std::fs::write(path, text)?)
}

pub fn load_diagram(path: &Path) -> Result<CoxeterDiagram> {
    CoxeterDiagram::parse(&read(path)?)
}

pub fn save_diagram(path: &Path, d: &CoxeterDiagram) -> Result<()> {
    write(path, &to_canonical_json(d))
}

pub fn load_geometry(path: &Path) -> Result<Geometry> {
    from_versioned_json(&read(path)?)
}

pub fn save_geometry(path: &Path, g: &Geometry) -> Result<()> {
    write(path, &to_canonical_json(g))
}

/// Saved state of the free construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeStateFile {
    pub diagram: CoxeterDiagram,
    pub geometry: Geometry,
    pub stage: usize,
    pub task_log: Vec<TaskRecord>,
    pub rounds: Vec<RoundReport>,
    /// Progress metrics of the seed and after every round.
    pub metrics: Vec<ProgressMetrics>,
}

impl FreeStateFile {
    pub fn new(state: &ConstructionState, metrics: Vec<ProgressMetrics>) -> Self {
        Self {
            diagram: state.diagram.clone(),
            geometry: state.geometry.clone(),
            stage: state.stage,
            task_log: state.task_log.clone(),
            rounds: state.rounds.clone(),
            metrics,
        }
    }

    pub fn into_state(self) -> ConstructionState {
        ConstructionState {
            geometry: self.geometry,
            diagram: self.diagram,
            stage: self.stage,
            task_log: self.task_log,
            rounds: self.rounds,
        }
    }
}

fn invariant_error(context: &str, v: Verdict) -> Error {
    Error::InvariantViolation {
        context: context.into(),
        verdict: Box::new(v),
    }
}

/// Loads a free-construction state and re-checks (F), (P) and (D).
pub fn load_free_state(path: &Path) -> Result<FreeStateFile> {
    let file: FreeStateFile = from_versioned_json(&read(path)?)?;
    file.geometry.require_types(&file.diagram)?;
    if let Some(v) = properties::fpd_failure(&file.geometry, &file.diagram)? {
        return Err(invariant_error("loading state", v));
    }
    Ok(file)
}

pub fn save_free_state(path: &Path, file: &FreeStateFile) -> Result<()> {
    write(path, &to_canonical_json(file))
}

/// Loads a `C_n` state and re-checks its six properties.
pub fn load_cn_state(path: &Path) -> Result<CnState> {
    let s: CnState = from_versioned_json(&read(path)?)?;
    if let Some(v) = cn::check_cn_properties(&s)?
        .into_iter()
        .find(|v| !v.is_pass())
    {
        return Err(invariant_error("loading state", v));
    }
    Ok(s)
}

pub fn save_cn_state(path: &Path, s: &CnState) -> Result<()> {
    write(path, &to_canonical_json(s))
}

const SHAPES: [&str; 6] = [
    "circle", "box", "diamond", "triangle", "hexagon", "pentagon",
];

/// Graphviz text of the incidence graph: one node per vertex shaped by
/// type, one edge per incidence.
pub fn export_dot(g: &Geometry) -> String {
    let mut out = String::from("graph geometry {\n");
    for v in 0..g.len() {
        let label = g.type_label(v);
        let shape = SHAPES[g.type_of(v) % SHAPES.len()];
        writeln!(out, "  v{v} [label=\"{v}:{label}\", shape={shape}];").unwrap();
    }
    for (a, b) in g.incidences() {
        writeln!(out, "  v{a} -- v{b};").unwrap();
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::Bond;
    use crate::fixtures;
    use crate::free::{self, Caps};

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("forge-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn fixtures_round_trip() {
        for (k, g) in [fixtures::fano_flag_geometry(), fixtures::neumaier()]
            .iter()
            .enumerate()
        {
            let p = tmp(&format!("g{k}.json"));
            save_geometry(&p, g).unwrap();
            let text = std::fs::read_to_string(&p).unwrap();
            let back = load_geometry(&p).unwrap();
            assert_eq!(&back, g);
            save_geometry(&p, &back).unwrap();
            assert_eq!(std::fs::read_to_string(&p).unwrap(), text);
        }
        let d = CoxeterDiagram::f4();
        let p = tmp("d.json");
        save_diagram(&p, &d).unwrap();
        assert_eq!(load_diagram(&p).unwrap(), d);
    }

    #[test]
    fn rejects_bad_files() {
        let same_type = r#"{"types":["1","2"],"vertices":[{"id":0,"type":"1"},{"id":1,"type":"1"}],"incidences":[[0,1]]}"#;
        assert!(from_versioned_json::<Geometry>(same_type).is_err());
        let versioned = r#"{"version":2,"types":["1"],"vertices":[],"incidences":[]}"#;
        assert!(matches!(
            from_versioned_json::<Geometry>(versioned),
            Err(Error::Format(_))
        ));
        assert!(from_versioned_json::<Geometry>("{").is_err());
    }

    #[test]
    fn free_state_round_trip_and_invariant_check() {
        let d = CoxeterDiagram::h(3);
        let state = free::build_free(&d, Geometry::over(&d), 1, Caps::default(), false).unwrap();
        let file = FreeStateFile::new(&state, vec![state.progress_metrics()]);
        let p = tmp("free.json");
        save_free_state(&p, &file).unwrap();
        let back = load_free_state(&p).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.into_state(), state);

        // Two non-incident vertices of non-adjacent types violate (F).
        let mut g = Geometry::over(&d);
        g.add_vertex(0);
        g.add_vertex(2);
        let bad = FreeStateFile {
            geometry: g,
            ..file
        };
        save_free_state(&p, &bad).unwrap();
        assert!(matches!(
            load_free_state(&p),
            Err(Error::InvariantViolation { .. })
        ));
    }

    #[test]
    fn cn_state_round_trip() {
        let mut s = cn::init_lambda0(3, Bond::Finite(4)).unwrap();
        s.run_cn(3, 2, 20, false).unwrap();
        let p = tmp("cn.json");
        save_cn_state(&p, &s).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let back = load_cn_state(&p).unwrap();
        assert_eq!(back, s);
        save_cn_state(&p, &back).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), text);
    }

    #[test]
    fn dot_export() {
        let d = CoxeterDiagram::c(3);
        assert_eq!(export_dot(&Geometry::over(&d)), "graph geometry {\n}\n");
        let mut one = Geometry::over(&d);
        one.add_vertex(1);
        assert_eq!(export_dot(&one).matches("shape=").count(), 1);
        let fano = export_dot(&fixtures::fano_flag_geometry());
        assert_eq!(fano.matches("shape=").count(), 14);
        assert_eq!(fano.matches(" -- ").count(), 21);
        assert_eq!(fano, export_dot(&fixtures::fano_flag_geometry()));
    }
}
