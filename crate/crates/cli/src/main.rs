//! `forge`: build, verify and export finite stages of free constructions.
//!
//! Exit codes: 0 on success or PASS, 1 on a verification failure (the
//! witness is printed to standard output as JSON), 2 on usage or input
//! errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use forge_core::cn::{self, CnState};
use forge_core::fraisse::{self, Embedding, LStructure};
use forge_core::free::{self, Caps, ConstructionState};
use forge_core::io::{self, FreeStateFile};
use forge_core::{fixtures, Bond, CoxeterDiagram, Error, Geometry, Verdict};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "forge",
    version,
    about = "Free constructions of geometries of Coxeter type"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run rounds of the free construction and save the state.
    BuildFree(BuildFree),
    /// Run the C_n construction from its initial stage and save the state.
    BuildCn(BuildCn),
    /// Check a geometry or state against a property suite.
    Verify(Verify),
    /// Print the residue of a flag.
    Residue(ResidueArgs),
    /// Write a geometry in DOT format.
    Export(Export),
    /// Amalgamation class tools.
    #[command(subcommand)]
    Fraisse(Fraisse),
    /// Print progress metrics of a geometry.
    Metrics(Metrics),
}

#[derive(Args)]
struct BuildFree {
    /// Diagram file, or a name such as C3, H3, F4, I2(5).
    #[arg(long)]
    diagram: String,
    /// Seed geometry file, or `empty`.
    #[arg(long, default_value = "empty")]
    seed: String,
    #[arg(long, default_value_t = 3)]
    rounds: usize,
    #[arg(long, default_value_t = 64)]
    cap_a: usize,
    #[arg(long, default_value_t = 64)]
    cap_b: usize,
    #[arg(long, default_value_t = 64)]
    cap_c: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    check_every_task: bool,
}

#[derive(Args)]
struct BuildCn {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: u32,
    #[arg(long)]
    steps: usize,
    #[arg(long, default_value_t = 3)]
    height: i64,
    #[arg(long, default_value_t = 100)]
    limit: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    check_every_step: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Properties {
    Fpd,
    Cn,
    #[value(name = "typeM")]
    TypeM,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fixture {
    Neumaier,
    Fano,
}

/// Where a geometry comes from; exactly one source.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Geometry file.
    #[arg(long)]
    geometry: Option<PathBuf>,
    /// Built-in geometry.
    #[arg(long, value_enum)]
    fixture: Option<Fixture>,
    /// State file of `build-free` or `build-cn`.
    #[arg(long)]
    state: Option<PathBuf>,
}

#[derive(Args)]
struct Verify {
    #[arg(long, value_enum)]
    properties: Properties,
    #[command(flatten)]
    source: Source,
    /// Required unless the source is a state file.
    #[arg(long)]
    diagram: Option<String>,
    /// Panel sample for the type-n residue checks of `cn`.
    #[arg(long, default_value_t = 20)]
    sample: usize,
}

#[derive(Args)]
struct ResidueArgs {
    #[command(flatten)]
    source: Source,
    /// Comma-separated vertex ids of the flag.
    #[arg(long, value_delimiter = ',')]
    flag: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Export {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Fraisse {
    /// Sample hereditary and amalgamation instances.
    Ap {
        #[arg(long)]
        diagram: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 12)]
        size_bound: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Free amalgam of B and C over A, closed with B-only rounds.
    Amalgamate {
        #[arg(long)]
        diagram: String,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        c: PathBuf,
        #[arg(long)]
        iota: PathBuf,
        #[arg(long)]
        kappa: PathBuf,
        #[arg(long, default_value_t = 2)]
        rounds: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Metrics {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    diagram: Option<String>,
}

enum Outcome {
    Pass,
    Fail,
}

/// Marks errors caused by the input rather than by a verification.
#[derive(Debug)]
struct InputError(String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn input<T>(r: forge_core::Result<T>) -> Result<T> {
    r.map_err(|e| InputError(e.to_string()).into())
}

fn diagram(given: &str) -> Result<CoxeterDiagram> {
    let path = Path::new(given);
    if path.exists() {
        return input(io::load_diagram(path)).with_context(|| format!("reading {given}"));
    }
    CoxeterDiagram::named(given)
        .ok_or_else(|| InputError(format!("no diagram file or name `{given}`")).into())
}

enum Loaded {
    Geometry(Geometry),
    Free(FreeStateFile),
    Cn(Box<CnState>),
}

fn load(source: &Source) -> Result<Loaded> {
    if let Some(p) = &source.geometry {
        return Ok(Loaded::Geometry(input(io::load_geometry(p))?));
    }
    if let Some(f) = source.fixture {
        return Ok(Loaded::Geometry(match f {
            Fixture::Neumaier => fixtures::neumaier(),
            Fixture::Fano => fixtures::fano_flag_geometry(),
        }));
    }
    let p = source.state.as_ref().expect("clap enforces one source");
    let text =
        std::fs::read_to_string(p).map_err(|e| InputError(format!("{}: {e}", p.display())))?;
    // State files are not re-verified here: `verify` reports on them.
    if let Ok(f) = io::from_versioned_json::<FreeStateFile>(&text) {
        return Ok(Loaded::Free(f));
    }
    let s = input(io::from_versioned_json::<CnState>(&text))
        .with_context(|| format!("{} is neither a geometry nor a state file", p.display()))?;
    Ok(Loaded::Cn(Box::new(s)))
}

fn load_geometry(source: &Source) -> Result<Geometry> {
    match load(source)? {
        Loaded::Geometry(g) => Ok(g),
        Loaded::Free(f) => Ok(f.geometry),
        Loaded::Cn(_) => bail!(InputError("expected a geometry, found a C_n state".into())),
    }
}

fn geometry_and_diagram(source: &Source, d: &Option<String>) -> Result<(Geometry, CoxeterDiagram)> {
    match (load(source)?, d) {
        (Loaded::Free(f), None) => Ok((f.geometry, f.diagram)),
        (Loaded::Free(f), Some(d)) => Ok((f.geometry, diagram(d)?)),
        (Loaded::Geometry(g), Some(d)) => Ok((g, diagram(d)?)),
        (Loaded::Geometry(_), None) => {
            bail!(InputError("--diagram is required for a geometry".into()))
        }
        (Loaded::Cn(_), _) => bail!(InputError("expected a geometry, found a C_n state".into())),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verdicts(vs: &[Verdict]) -> Outcome {
    println!(
        "{}",
        serde_json::to_string_pretty(vs).expect("verdicts serialize")
    );
    if vs.iter().all(Verdict::is_pass) {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn build_free(a: BuildFree) -> Result<Outcome> {
    let d = diagram(&a.diagram)?;
    let seed = if a.seed == "empty" {
        Geometry::over(&d)
    } else {
        input(io::load_geometry(Path::new(&a.seed)))?
    };
    let caps = Caps {
        a: a.cap_a,
        b: a.cap_b,
        c: a.cap_c,
    };
    let mut state = input(ConstructionState::new(d, seed))?;
    let mut metrics = vec![state.progress_metrics()];
    for _ in 0..a.rounds {
        state.run_round(caps, a.check_every_task)?;
        metrics.push(state.progress_metrics());
    }
    let file = FreeStateFile::new(&state, metrics);
    io::save_free_state(&a.out, &file)?;
    let last = file.metrics.last().expect("seed metrics");
    println!(
        "{}",
        json!({"stage": state.stage, "vertices": last.vertices, "incidences": last.incidences, "tasks": state.task_log.len()})
    );
    Ok(Outcome::Pass)
}

fn build_cn(a: BuildCn) -> Result<Outcome> {
    let mut s = input(cn::init_lambda0(a.n, Bond::Finite(a.m)))?;
    s.run_cn(a.steps, a.height, a.limit, a.check_every_step)?;
    io::save_cn_state(&a.out, &s)?;
    println!(
        "{}",
        json!({"step": s.step, "vertices": s.vertices.len(), "type_n": s.type_n_count(), "height": s.height})
    );
    Ok(Outcome::Pass)
}

fn verify(a: Verify) -> Result<Outcome> {
    match a.properties {
        Properties::Fpd => {
            let (g, d) = geometry_and_diagram(&a.source, &a.diagram)?;
            Ok(verdicts(&input(forge_core::properties::check_fpd(&g, &d))?))
        }
        Properties::TypeM => {
            let (g, d) = geometry_and_diagram(&a.source, &a.diagram)?;
            Ok(verdicts(&[input(g.is_geometry_of_type_m(&d))?]))
        }
        Properties::Cn => {
            let Loaded::Cn(s) = load(&a.source)? else {
                bail!(InputError("--properties cn needs a C_n state file".into()));
            };
            let mut vs = input(cn::check_cn_properties(&s))?;
            for x in s.tops() {
                let v = input(cn::verify_type_n_residue(&s, x, a.sample))?;
                if !v.is_pass() {
                    vs.push(v);
                    break;
                }
            }
            Ok(verdicts(&vs))
        }
    }
}

fn residue(a: ResidueArgs) -> Result<Outcome> {
    let g = load_geometry(&a.source)?;
    let r = input(g.residue(&a.flag.as_slice().into()))?;
    let value = json!({"embedding": r.embedding, "geometry": r.geometry});
    emit(&a.out, &io::to_canonical_json(&value))?;
    Ok(Outcome::Pass)
}

fn export(a: Export) -> Result<Outcome> {
    let g = load_geometry(&a.source)?;
    emit(&a.out, &io::export_dot(&g))?;
    Ok(Outcome::Pass)
}

fn structure(path: &Path, d: &CoxeterDiagram) -> Result<LStructure> {
    let g = input(io::load_geometry(path))?;
    input(LStructure::new(g, d.clone()))
        .with_context(|| format!("{} is not in the class", path.display()))
}

fn embedding(path: &Path) -> Result<Embedding> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    input(io::from_versioned_json(&text))
}

fn fraisse_cmd(f: Fraisse) -> Result<Outcome> {
    match f {
        Fraisse::Ap {
            diagram: given,
            samples,
            size_bound,
            seed,
            out,
        } => {
            let d = diagram(&given)?;
            let report = input(fraisse::check_amalgamation_property(
                samples, size_bound, &d, seed,
            ))?;
            emit(&out, &io::to_canonical_json(&report))?;
            if out.is_some() {
                println!(
                    "{}",
                    json!({"hereditary_pass": report.hereditary_pass, "amalgamation_pass": report.amalgamation_pass, "samples": samples})
                );
            }
            Ok(if report.failures.is_empty() {
                Outcome::Pass
            } else {
                if out.is_some() {
                    println!("{}", serde_json::to_string_pretty(&report.failures)?);
                }
                Outcome::Fail
            })
        }
        Fraisse::Amalgamate {
            diagram: given,
            a,
            b,
            c,
            iota,
            kappa,
            rounds,
            out,
        } => {
            let d = diagram(&given)?;
            let (a, b, c) = (structure(&a, &d)?, structure(&b, &d)?, structure(&c, &d)?);
            let (iota, kappa) = (embedding(&iota)?, embedding(&kappa)?);
            let (e, lambda, mu) = fraisse::free_amalgam(&a, &b, &c, &iota, &kappa)?;
            let closed = fraisse::close_into_class(&e, rounds, Caps::default())?;
            let value = json!({"geometry": closed.geometry, "lambda": lambda, "mu": mu});
            emit(&out, &io::to_canonical_json(&value))?;
            Ok(Outcome::Pass)
        }
    }
}

fn metrics(a: Metrics) -> Result<Outcome> {
    let (g, d) = geometry_and_diagram(&a.source, &a.diagram)?;
    print!("{}", io::to_canonical_json(&free::progress_metrics(&g, &d)));
    Ok(Outcome::Pass)
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::BuildFree(a) => build_free(a),
        Command::BuildCn(a) => build_cn(a),
        Command::Verify(a) => verify(a),
        Command::Residue(a) => residue(a),
        Command::Export(a) => export(a),
        Command::Fraisse(f) => fraisse_cmd(f),
        Command::Metrics(a) => metrics(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            if let Some(Error::InvariantViolation { context, verdict }) = e.downcast_ref::<Error>()
            {
                let witness = json!({"context": context, "verdict": verdict});
                println!(
                    "{}",
                    serde_json::to_string_pretty(&witness).expect("verdict serializes")
                );
                eprintln!("forge: {e}");
                return ExitCode::from(1);
            }
            eprintln!("forge: {e:#}");
            ExitCode::from(2)
        }
    }
}
