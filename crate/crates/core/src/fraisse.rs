//! Geometries satisfying (F), (P) and (D) as structures in a language with
//! a unary predicate per type, incidence, and two function families:
//!
//! * `f_k(x, y, z)`: the `k`-th vertex on the unique shortest path from `y`
//!   to `z` in the residue of `x`;
//! * `g_{i,j}(x, y)`: the unique common type-`j` neighbor of two type-`i`
//!   vertices, for bonds `m_{i,j} >= 4`.
//!
//! Both fall back to `x` when the description does not apply. Substructures
//! are closed under both families; the amalgamation harness glues such
//! substructures freely and closes the result with B-only rounds of the
//! free construction.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagram::{Bond, CoxeterDiagram};
use crate::error::{Error, Result};
use crate::free::{self, Caps, ConstructionState};
use crate::geometry::{Geometry, VertexId};
use crate::properties;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LStructure {
    pub geometry: Geometry,
    pub diagram: CoxeterDiagram,
}

/// Bond matrices of C3, H3 and F4 up to relabeling of types.
fn is_supported(d: &CoxeterDiagram) -> bool {
    ["C3", "H3", "F4"].iter().any(|name| {
        let e = CoxeterDiagram::named(name).unwrap();
        e.rank() == d.rank()
            && (0..d.rank()).all(|i| (0..d.rank()).all(|j| i == j || e.bond(i, j) == d.bond(i, j)))
    })
}

impl LStructure {
    pub fn new(geometry: Geometry, diagram: CoxeterDiagram) -> Result<Self> {
        if !is_supported(&diagram) {
            return Err(Error::pre(
                "the language is defined over C3, H3 and F4 only",
            ));
        }
        geometry.require_types(&diagram)?;
        if let Some(v) = properties::fpd_failure(&geometry, &diagram)? {
            return Err(Error::InvariantViolation {
                context: "structure".into(),
                verdict: Box::new(v),
            });
        }
        Ok(Self { geometry, diagram })
    }

    pub fn empty(diagram: CoxeterDiagram) -> Result<Self> {
        Self::new(Geometry::over(&diagram), diagram)
    }

    pub fn len(&self) -> usize {
        self.geometry.len()
    }

    pub fn is_empty(&self) -> bool {
        self.geometry.is_empty()
    }
}

/// The unique shortest path from `y` to `z` in the residue of `x`, if any.
pub fn unique_residue_path(
    s: &LStructure,
    x: VertexId,
    y: VertexId,
    z: VertexId,
) -> Option<Vec<VertexId>> {
    let g = &s.geometry;
    let residue = g.residue_vertices(&[x]);
    let ly = residue.binary_search(&y).ok()?;
    let lz = residue.binary_search(&z).ok()?;
    let (dist, count, parent) = g.subgraph(&residue).shortest_path_counts(ly);
    dist[lz]?;
    if count[lz] != 1 {
        return None;
    }
    let mut path = vec![lz];
    while *path.last().unwrap() != ly {
        path.push(parent[*path.last().unwrap()]);
    }
    path.reverse();
    Some(path.into_iter().map(|l| residue[l]).collect())
}

pub fn eval_f(s: &LStructure, k: usize, x: VertexId, y: VertexId, z: VertexId) -> VertexId {
    unique_residue_path(s, x, y, z)
        .and_then(|p| p.get(k).copied())
        .unwrap_or(x)
}

pub fn eval_g(s: &LStructure, i: usize, j: usize, x: VertexId, y: VertexId) -> Result<VertexId> {
    if i == j || s.diagram.bond(i, j) < Bond::Finite(4) {
        return Err(Error::pre(format!(
            "g needs a bond m >= 4 between types {i} and {j}"
        )));
    }
    let g = &s.geometry;
    if x == y || g.type_of(x) != i || g.type_of(y) != i {
        return Ok(x);
    }
    let common: Vec<VertexId> = g
        .neighbors(x)
        .intersection(g.neighbors(y))
        .copied()
        .filter(|&w| g.type_of(w) == j)
        .collect();
    Ok(if common.len() == 1 { common[0] } else { x })
}

fn strong_pairs(d: &CoxeterDiagram) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..d.rank() {
        for j in 0..d.rank() {
            if i != j && d.bond(i, j) >= Bond::Finite(4) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Least superset of `seed` closed under every `f_k` and `g_{i,j}`, sorted;
/// `None` once it grows beyond `bound`.
pub fn closure_bounded(s: &LStructure, seed: &[VertexId], bound: usize) -> Option<Vec<VertexId>> {
    let mut set: BTreeSet<VertexId> = seed.iter().copied().collect();
    let strong = strong_pairs(&s.diagram);
    loop {
        if set.len() > bound {
            return None;
        }
        let members: Vec<VertexId> = set.iter().copied().collect();
        let mut added = Vec::new();
        for &x in &members {
            let in_residue: Vec<VertexId> = members
                .iter()
                .copied()
                .filter(|&v| s.geometry.incident(x, v))
                .collect();
            for (a, &y) in in_residue.iter().enumerate() {
                for &z in &in_residue[a + 1..] {
                    if let Some(path) = unique_residue_path(s, x, y, z) {
                        added.extend(path.into_iter().filter(|v| !set.contains(v)));
                    }
                }
            }
        }
        for &(i, j) in &strong {
            for &x in &members {
                for &y in &members {
                    let w = eval_g(s, i, j, x, y).expect("strong pair");
                    if !set.contains(&w) {
                        added.push(w);
                    }
                }
            }
        }
        if added.is_empty() {
            return Some(members);
        }
        set.extend(added);
    }
}

pub fn closure(s: &LStructure, seed: &[VertexId]) -> Vec<VertexId> {
    closure_bounded(s, seed, usize::MAX).expect("unbounded")
}

/// An injective map from the vertices `0..len` of one structure into
/// another.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Embedding {
    pub map: Vec<VertexId>,
}

impl Embedding {
    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    pub fn apply(&self, v: VertexId) -> VertexId {
        self.map[v]
    }

    /// `other` after `self`.
    pub fn then(&self, other: &Embedding) -> Embedding {
        Embedding {
            map: self.map.iter().map(|&v| other.map[v]).collect(),
        }
    }

    /// Checks injectivity and preservation of types, incidence and
    /// non-incidence.
    pub fn validate(&self, from: &Geometry, to: &Geometry) -> Result<()> {
        if self.map.len() != from.len() {
            return Err(Error::pre(format!(
                "embedding covers {} of {} vertices",
                self.map.len(),
                from.len()
            )));
        }
        let image: BTreeSet<VertexId> = self.map.iter().copied().collect();
        if image.len() != self.map.len() || self.map.iter().any(|&v| v >= to.len()) {
            return Err(Error::pre(
                "embedding is not an injective map into the target",
            ));
        }
        for v in 0..from.len() {
            if from.type_label(v) != to.type_label(self.map[v]) {
                return Err(Error::pre(format!("embedding changes the type of {v}")));
            }
        }
        for a in 0..from.len() {
            for b in a + 1..from.len() {
                if from.incident(a, b) != to.incident(self.map[a], self.map[b]) {
                    return Err(Error::pre(format!(
                        "embedding changes incidence of {a}, {b}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// First instance where the map fails to commute with `f_k` or `g`.
    pub fn non_commuting(&self, from: &LStructure, to: &LStructure) -> Option<String> {
        let n = from.len();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let src = unique_residue_path(from, x, y, z);
                    let dst = unique_residue_path(to, self.map[x], self.map[y], self.map[z]);
                    let mapped = src.map(|p| p.iter().map(|&v| self.map[v]).collect::<Vec<_>>());
                    if mapped != dst {
                        return Some(format!("f at ({x}, {y}, {z})"));
                    }
                }
            }
        }
        for (i, j) in strong_pairs(&from.diagram) {
            for x in 0..n {
                for y in 0..n {
                    let a = eval_g(from, i, j, x, y).ok()?;
                    let b = eval_g(to, i, j, self.map[x], self.map[y]).ok()?;
                    if self.map[a] != b {
                        return Some(format!("g_{i},{j} at ({x}, {y})"));
                    }
                }
            }
        }
        None
    }
}

/// The substructure generated by `seed`, with its inclusion.
pub fn generated_substructure(s: &LStructure, seed: &[VertexId]) -> (LStructure, Embedding) {
    let verts = closure(s, seed);
    let sub = LStructure {
        geometry: s.geometry.induced(&verts),
        diagram: s.diagram.clone(),
    };
    (sub, Embedding { map: verts })
}

/// The free amalgam of `b` and `c` over `a`, with the embeddings of `b`
/// (identity on ids) and `c` into it.
pub fn free_amalgam(
    a: &LStructure,
    b: &LStructure,
    c: &LStructure,
    iota: &Embedding,
    kappa: &Embedding,
) -> Result<(LStructure, Embedding, Embedding)> {
    iota.validate(&a.geometry, &b.geometry)?;
    kappa.validate(&a.geometry, &c.geometry)?;
    let d = &b.diagram;
    let mut g = b.geometry.clone();
    let mut mu = vec![usize::MAX; c.len()];
    for (v, &w) in kappa.map.iter().enumerate() {
        mu[w] = iota.map[v];
    }
    let first_new = g.len();
    for (w, slot) in mu.iter_mut().enumerate() {
        if *slot == usize::MAX {
            *slot = g.add_vertex(g.type_index(c.geometry.type_label(w))?);
        }
    }
    for (p, q) in c.geometry.incidences() {
        if !g.incident(mu[p], mu[q]) {
            if p < c.len() && q < c.len() && mu[p] < first_new && mu[q] < first_new {
                return Err(Error::pre(format!(
                    "c adds incidence {p}, {q} between vertices of the common part"
                )));
            }
            g.add_incidence(mu[p], mu[q])?;
        }
    }
    let in_a: BTreeSet<VertexId> = iota.map.iter().copied().collect();
    for u in (0..first_new).filter(|u| !in_a.contains(u)) {
        let forced = d.forced_mask(g.type_of(u));
        for v in first_new..g.len() {
            if forced & (1 << g.type_of(v)) != 0 && !g.incident(u, v) {
                g.add_incidence(u, v)?;
            }
        }
    }
    let e = LStructure {
        geometry: g,
        diagram: d.clone(),
    };
    if let Some(v) = properties::fpd_failure(&e.geometry, d)? {
        return Err(Error::InvariantViolation {
            context: "free amalgam".into(),
            verdict: Box::new(v),
        });
    }
    Ok((e, Embedding::identity(b.len()), Embedding { map: mu }))
}

/// Rounds of the free construction using Procedure B only.
pub fn close_into_class(s: &LStructure, rounds: usize, caps: Caps) -> Result<LStructure> {
    let caps = Caps::only_b(caps.b);
    let mut state = ConstructionState::new(s.diagram.clone(), s.geometry.clone())?;
    for _ in 0..rounds {
        state.run_round(caps, false)?;
    }
    Ok(LStructure {
        geometry: state.geometry,
        diagram: state.diagram,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApFailure {
    pub sample: usize,
    pub seed: u64,
    pub check: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApReport {
    pub samples: usize,
    pub size_bound: usize,
    pub seed: u64,
    pub base_vertices: usize,
    pub hereditary_pass: usize,
    pub hereditary_fail: usize,
    pub amalgamation_pass: usize,
    pub amalgamation_fail: usize,
    /// Samples with an empty base, i.e. joint embedding instances.
    pub joint_embedding_cases: usize,
    /// Samples whose embeddings into the closed amalgam also commute with
    /// every `f_k` and `g`; informational.
    pub functions_commute: usize,
    pub failures: Vec<ApFailure>,
}

/// Parameters of the geometry the harness draws substructures from.
pub const HARNESS_ROUNDS: usize = 3;
pub const CLOSE_ROUNDS: usize = 2;

/// Stage the harness samples from: the free construction from the empty
/// geometry.
pub fn harness_base(diagram: &CoxeterDiagram) -> Result<LStructure> {
    let state = free::build_free(
        diagram,
        Geometry::over(diagram),
        HARNESS_ROUNDS,
        Caps::default(),
        false,
    )?;
    LStructure::new(state.geometry, state.diagram)
}

fn sample_seed(seed: u64, sample: usize) -> u64 {
    seed ^ (sample as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Random closed vertex set of at most `bound` vertices containing `base`.
fn random_closed(
    s: &LStructure,
    base: &[VertexId],
    extra: usize,
    bound: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<VertexId> {
    for _ in 0..64 {
        let mut seed = base.to_vec();
        for _ in 0..extra {
            seed.push(rng.gen_range(0..s.len()));
        }
        if let Some(c) = closure_bounded(s, &seed, bound) {
            return c;
        }
    }
    closure_bounded(s, base, usize::MAX).unwrap()
}

/// Induced structure on `verts` under a random relabeling, with the map
/// from each position of `verts` to its id in the relabeled structure.
fn relabeled(
    s: &LStructure,
    verts: &[VertexId],
    rng: &mut ChaCha8Rng,
) -> (LStructure, Vec<VertexId>) {
    let mut order = verts.to_vec();
    order.shuffle(rng);
    let geometry = s.geometry.induced(&order);
    let mut pos = vec![0; verts.len()];
    for (k, v) in verts.iter().enumerate() {
        pos[k] = order.iter().position(|w| w == v).unwrap();
    }
    (
        LStructure {
            geometry,
            diagram: s.diagram.clone(),
        },
        pos,
    )
}

/// Samples hereditary and amalgamation instances from substructures of
/// [`harness_base`].
pub fn check_amalgamation_property(
    samples: usize,
    size_bound: usize,
    diagram: &CoxeterDiagram,
    seed: u64,
) -> Result<ApReport> {
    let mut report = ApReport {
        samples,
        size_bound,
        seed,
        ..ApReport::default()
    };
    if samples == 0 {
        return Ok(report);
    }
    let base = harness_base(diagram)?;
    report.base_vertices = base.len();
    for sample in 0..samples {
        let sseed = sample_seed(seed, sample);
        let mut rng = ChaCha8Rng::seed_from_u64(sseed);
        let fail = |check: &str, message: String, report: &mut ApReport| {
            report.failures.push(ApFailure {
                sample,
                seed: sseed,
                check: check.into(),
                message,
            });
        };

        // Hereditary: closures of random subsets are members.
        let picked = random_closed(&base, &[], rng.gen_range(1..=3), size_bound, &mut rng);
        let sub = base.geometry.induced(&picked);
        match properties::fpd_failure(&sub, diagram)? {
            None => report.hereditary_pass += 1,
            Some(v) => {
                report.hereditary_fail += 1;
                fail("hereditary", v.to_string(), &mut report);
            }
        }

        // Amalgamation over a random, possibly empty, base.
        let a_size = rng.gen_range(0..=2);
        let a_verts = random_closed(&base, &[], a_size, size_bound / 2, &mut rng);
        if a_verts.is_empty() {
            report.joint_embedding_cases += 1;
        }
        let b_verts = random_closed(&base, &a_verts, rng.gen_range(1..=2), size_bound, &mut rng);
        let c_verts = random_closed(&base, &a_verts, rng.gen_range(1..=2), size_bound, &mut rng);
        let a = LStructure {
            geometry: base.geometry.induced(&a_verts),
            diagram: diagram.clone(),
        };
        let (b, b_pos) = relabeled(&base, &b_verts, &mut rng);
        let (c, c_pos) = relabeled(&base, &c_verts, &mut rng);
        let iota = Embedding {
            map: a_verts
                .iter()
                .map(|v| b_pos[b_verts.binary_search(v).unwrap()])
                .collect(),
        };
        let kappa = Embedding {
            map: a_verts
                .iter()
                .map(|v| c_pos[c_verts.binary_search(v).unwrap()])
                .collect(),
        };
        match amalgamate_and_check(&a, &b, &c, &iota, &kappa) {
            Ok(commutes) => {
                report.amalgamation_pass += 1;
                report.functions_commute += usize::from(commutes);
            }
            Err(e) => {
                report.amalgamation_fail += 1;
                fail("amalgamation", e.to_string(), &mut report);
            }
        }
    }
    Ok(report)
}

/// Free amalgam, B-only closure and the checks on the resulting square.
/// Returns whether the embeddings also commute with the functions.
pub fn amalgamate_and_check(
    a: &LStructure,
    b: &LStructure,
    c: &LStructure,
    iota: &Embedding,
    kappa: &Embedding,
) -> Result<bool> {
    let (e, lambda, mu) = free_amalgam(a, b, c, iota, kappa)?;
    let closed = close_into_class(&e, CLOSE_ROUNDS, Caps::default())?;
    if let Some(v) = properties::fpd_failure(&closed.geometry, &closed.diagram)? {
        return Err(Error::InvariantViolation {
            context: "closure rounds".into(),
            verdict: Box::new(v),
        });
    }
    lambda.validate(&b.geometry, &closed.geometry)?;
    mu.validate(&c.geometry, &closed.geometry)?;
    if iota.then(&lambda) != kappa.then(&mu) {
        return Err(Error::pre("the amalgamation square does not commute"));
    }
    Ok(lambda.non_commuting(b, &closed).is_none() && mu.non_commuting(c, &closed).is_none())
}

/// A finite partial map between vertices of one structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialIso {
    pub pairs: Vec<(VertexId, VertexId)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum IsoExtension {
    /// The extended map on the generated closures, sorted by domain.
    Extended {
        pairs: Vec<(VertexId, VertexId)>,
    },
    NoCandidate,
    BudgetExhausted,
}

fn is_iso(s: &LStructure, pairs: &[(VertexId, VertexId)]) -> bool {
    let g = &s.geometry;
    let dom: BTreeSet<_> = pairs.iter().map(|p| p.0).collect();
    let img: BTreeSet<_> = pairs.iter().map(|p| p.1).collect();
    if dom.len() != pairs.len() || img.len() != pairs.len() {
        return false;
    }
    pairs.iter().all(|&(a, b)| g.type_of(a) == g.type_of(b))
        && pairs.iter().enumerate().all(|(k, &(a, b))| {
            pairs[k + 1..]
                .iter()
                .all(|&(c, d)| g.incident(a, c) == g.incident(b, d))
        })
}

/// Extends `map` along the functions until closed, or fails on a clash.
/// Each function evaluation costs one unit of `budget`.
fn propagate(
    s: &LStructure,
    map: &mut std::collections::BTreeMap<VertexId, VertexId>,
    budget: &mut usize,
) -> Option<bool> {
    let strong = strong_pairs(&s.diagram);
    loop {
        let pairs: Vec<(VertexId, VertexId)> = map.iter().map(|(&a, &b)| (a, b)).collect();
        let mut grew = false;
        let mut record =
            |src: VertexId,
             dst: VertexId,
             map: &mut std::collections::BTreeMap<VertexId, VertexId>| {
                match map.get(&src) {
                    Some(&d) => d == dst,
                    None => {
                        map.insert(src, dst);
                        grew = true;
                        true
                    }
                }
            };
        for &(x, x2) in &pairs {
            for &(y, y2) in &pairs {
                for &(z, z2) in &pairs {
                    if *budget == 0 {
                        return None;
                    }
                    *budget -= 1;
                    let p = unique_residue_path(s, x, y, z);
                    let q = unique_residue_path(s, x2, y2, z2);
                    match (p, q) {
                        (None, None) => {}
                        (Some(p), Some(q)) if p.len() == q.len() => {
                            for (u, v) in p.into_iter().zip(q) {
                                if !record(u, v, map) {
                                    return Some(false);
                                }
                            }
                        }
                        _ => return Some(false),
                    }
                }
            }
            for &(i, j) in &strong {
                for &(y, y2) in &pairs {
                    let u = eval_g(s, i, j, x, y).ok()?;
                    let v = eval_g(s, i, j, x2, y2).ok()?;
                    if !record(u, v, map) {
                        return Some(false);
                    }
                }
            }
        }
        if !grew {
            return Some(true);
        }
    }
}

/// One back-and-forth step: an image for `target` such that the map
/// extends to an isomorphism of the generated closures. Candidates are
/// tried in id order.
pub fn extend_partial_iso(
    s: &LStructure,
    iso: &PartialIso,
    target: VertexId,
    budget: usize,
) -> Result<IsoExtension> {
    if !is_iso(s, &iso.pairs) {
        return Err(Error::pre("the partial map is not an isomorphism"));
    }
    let dom: Vec<VertexId> = iso.pairs.iter().map(|p| p.0).collect();
    let img: Vec<VertexId> = iso.pairs.iter().map(|p| p.1).collect();
    let mut sd = dom.clone();
    sd.sort_unstable();
    let mut si = img.clone();
    si.sort_unstable();
    if closure(s, &dom) != sd || closure(s, &img) != si {
        return Err(Error::pre(
            "domain and image must be generated substructures",
        ));
    }
    if dom.contains(&target) {
        return Err(Error::pre("target already lies in the domain"));
    }
    let mut budget = budget;
    let ty = s.geometry.type_of(target);
    for cand in (0..s.len()).filter(|&c| s.geometry.type_of(c) == ty && !img.contains(&c)) {
        let mut map: std::collections::BTreeMap<VertexId, VertexId> =
            iso.pairs.iter().copied().collect();
        map.insert(target, cand);
        match propagate(s, &mut map, &mut budget) {
            None => return Ok(IsoExtension::BudgetExhausted),
            Some(false) => continue,
            Some(true) => {
                let pairs: Vec<(VertexId, VertexId)> = map.into_iter().collect();
                if is_iso(s, &pairs) {
                    return Ok(IsoExtension::Extended { pairs });
                }
            }
        }
        if budget == 0 {
            return Ok(IsoExtension::BudgetExhausted);
        }
    }
    Ok(IsoExtension::NoCandidate)
}
