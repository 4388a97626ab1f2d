//! The construction for string diagrams `C_n`-shaped at one end: types
//! `1..n` with bonds 3 along the string and a final bond `m >= 4`.
//!
//! The lower part of the geometry is the lattice of proper subspaces of
//! `Q^n` (type `i` = dimension `i`), which is never materialized. On top of
//! it live new vertices of type `n - 1`, each carrying a *precursor*
//! hyperplane that fixes its lower incidences, and new vertices of type `n`,
//! each carrying a *panel*: for every hyperplane `a` exactly one incident
//! type-`(n-1)` vertex with precursor `a`. Panels are stored sparsely; an
//! unlisted hyperplane stands for a vertex incident with that type-`n`
//! vertex alone, created on demand.
//!
//! Extensions join two vertices of the rank-2 residue at some
//! `(n-2)`-space `z` by a path of length `m - 1`. A scheduler interleaves
//! the lists of pending extensions by the 2-adic valuation of the step.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::diagram::Bond;
use crate::error::{Error, Result};
use crate::graph::{Graph, Length};
use crate::substrate::{Subspace, SubstrateHandle};
use crate::verdict::{Verdict, Witness};

/// A vertex of type `n - 1` or `n`: a new vertex by index, or a subspace
/// of the substrate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VRef {
    New(usize),
    Sub(Subspace),
}

/// Explicit entries of a panel map. Every hyperplane without an entry has
/// an implicit vertex incident with the owning type-`n` vertex only.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Panel(pub BTreeMap<Subspace, VRef>);

#[derive(Serialize, Deserialize)]
struct PanelEntry {
    precursor: Subspace,
    vertex: VRef,
}

#[derive(Serialize, Deserialize)]
struct PanelRepr {
    entries: Vec<PanelEntry>,
    lazy: bool,
}

impl Serialize for Panel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PanelRepr {
            entries: self
                .0
                .iter()
                .map(|(p, v)| PanelEntry {
                    precursor: p.clone(),
                    vertex: v.clone(),
                })
                .collect(),
            lazy: true,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Panel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PanelRepr::deserialize(d)?;
        if !r.lazy {
            return Err(serde::de::Error::custom("only lazy panels are supported"));
        }
        Ok(Panel(
            r.entries
                .into_iter()
                .map(|e| (e.precursor, e.vertex))
                .collect(),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NewVertex {
    /// Type `n - 1`.
    Hyper {
        precursor: Subspace,
        attached: BTreeSet<usize>,
    },
    /// Type `n`.
    Top { panel: Panel },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub z: Subspace,
    pub x: VRef,
    pub y: VRef,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleList {
    /// Vertices a triple must involve to belong here; `None` for `S_0`.
    pub involving: Option<Vec<usize>>,
    pub triples: Vec<Triple>,
    pub cursor: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    /// `lists[j]` is `S_j`.
    pub lists: Vec<TripleList>,
    pub applied: BTreeSet<Triple>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub list: usize,
    pub triple: Option<Triple>,
    /// Triples passed over because they were no longer viable.
    pub invalidated: usize,
    pub path: Vec<VRef>,
    pub created: Vec<usize>,
    /// Precursors of the type-`(n-1)` vertices on the path.
    pub precursors: Vec<Subspace>,
    pub height: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnState {
    pub n: usize,
    pub m: usize,
    pub substrate: SubstrateHandle,
    pub vertices: Vec<NewVertex>,
    /// Type-`n` vertices incident with a substrate hyperplane.
    #[serde(with = "entries")]
    pub substrate_attached: BTreeMap<Subspace, BTreeSet<usize>>,
    pub schedule: Schedule,
    pub step: usize,
    pub height: i64,
    pub limit: usize,
    pub log: Vec<StepRecord>,
}

mod entries {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<Subspace, BTreeSet<usize>>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(map.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<BTreeMap<Subspace, BTreeSet<usize>>, D::Error> {
        Ok(Vec::<(Subspace, BTreeSet<usize>)>::deserialize(d)?
            .into_iter()
            .collect())
    }
}

/// 2-adic valuation.
pub fn nu2(j: usize) -> usize {
    j.trailing_zeros() as usize
}

/// Materialized rank-2 residue at some `z`.
pub struct ZGraph {
    pub nodes: Vec<VRef>,
    pub graph: Graph,
}

impl ZGraph {
    pub fn index(&self, v: &VRef) -> Option<usize> {
        self.nodes.binary_search(v).ok()
    }

    pub fn distance(&self, a: &VRef, b: &VRef) -> Length {
        match (self.index(a), self.index(b)) {
            (Some(a), Some(b)) => self.graph.distance(a, b),
            _ => Length::Infinite,
        }
    }
}

/// Refill attempts per step, each raising the height by one.
const MAX_REFILLS: usize = 3;

impl CnState {
    pub fn type_n_count(&self) -> usize {
        self.tops().count()
    }

    pub fn tops(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertices.len()).filter(|&v| matches!(self.vertices[v], NewVertex::Top { .. }))
    }

    pub fn hypers(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertices.len()).filter(|&v| matches!(self.vertices[v], NewVertex::Hyper { .. }))
    }

    fn panel(&self, t: usize) -> Option<&Panel> {
        match self.vertices.get(t) {
            Some(NewVertex::Top { panel }) => Some(panel),
            _ => None,
        }
    }

    fn precursor_of_new(&self, h: usize) -> Option<&Subspace> {
        match self.vertices.get(h) {
            Some(NewVertex::Hyper { precursor, .. }) => Some(precursor),
            _ => None,
        }
    }

    /// Precursor of a type-`(n-1)` vertex; a substrate hyperplane is its
    /// own precursor.
    pub fn precursor<'a>(&'a self, v: &'a VRef) -> Option<&'a Subspace> {
        match v {
            VRef::New(h) => self.precursor_of_new(*h),
            VRef::Sub(s) if s.dim() + 1 == self.n => Some(s),
            VRef::Sub(_) => None,
        }
    }

    /// Type in `1..=n`; `None` for unknown indices.
    pub fn type_of(&self, v: &VRef) -> Option<usize> {
        match v {
            VRef::New(id) => match self.vertices.get(*id)? {
                NewVertex::Hyper { .. } => Some(self.n - 1),
                NewVertex::Top { .. } => Some(self.n),
            },
            VRef::Sub(s) => Some(s.dim()),
        }
    }

    /// Type-`n` vertices incident with a type-`(n-1)` vertex.
    pub fn attachments(&self, v: &VRef) -> BTreeSet<usize> {
        match v {
            VRef::New(h) => match &self.vertices[*h] {
                NewVertex::Hyper { attached, .. } => attached.clone(),
                NewVertex::Top { .. } => BTreeSet::new(),
            },
            VRef::Sub(s) => self.substrate_attached.get(s).cloned().unwrap_or_default(),
        }
    }

    /// The incidence relation of the whole (infinite) geometry.
    pub fn incident(&self, a: &VRef, b: &VRef) -> bool {
        let (Some(ta), Some(tb)) = (self.type_of(a), self.type_of(b)) else {
            return false;
        };
        if ta == tb {
            return false;
        }
        let (a, b, ta, tb) = if ta < tb {
            (a, b, ta, tb)
        } else {
            (b, a, tb, ta)
        };
        let n = self.n;
        match (a, b) {
            (VRef::Sub(s), VRef::Sub(t)) => s.is_subspace_of(t),
            (VRef::Sub(s), VRef::New(id)) => match &self.vertices[*id] {
                NewVertex::Hyper { precursor, .. } => s.is_subspace_of(precursor),
                NewVertex::Top { panel } => {
                    ta <= n - 2 || panel.0.get(s) == Some(&VRef::Sub(s.clone()))
                }
            },
            (VRef::New(h), VRef::New(t)) if ta == n - 1 && tb == n => {
                let p = self.precursor_of_new(*h).unwrap();
                self.panel(*t).unwrap().0.get(p) == Some(a)
            }
            _ => false,
        }
    }

    /// The materialized `{n-1, n}` residue at `z`, together with the given
    /// substrate hyperplanes through `z` (as isolated or attached nodes).
    pub fn z_graph(&self, z: &Subspace, extra: &[Subspace]) -> ZGraph {
        let mut nodes: BTreeSet<VRef> = BTreeSet::new();
        for (id, v) in self.vertices.iter().enumerate() {
            match v {
                NewVertex::Top { .. } => {
                    nodes.insert(VRef::New(id));
                }
                NewVertex::Hyper { precursor, .. } => {
                    if z.is_subspace_of(precursor) {
                        nodes.insert(VRef::New(id));
                    }
                }
            }
        }
        for (a, att) in &self.substrate_attached {
            if !att.is_empty() && z.is_subspace_of(a) {
                nodes.insert(VRef::Sub(a.clone()));
            }
        }
        for a in extra {
            if a.dim() + 1 == self.n && z.is_subspace_of(a) {
                nodes.insert(VRef::Sub(a.clone()));
            }
        }
        let nodes: Vec<VRef> = nodes.into_iter().collect();
        let mut edges = Vec::new();
        for (ti, node) in nodes.iter().enumerate() {
            let VRef::New(t) = node else { continue };
            let Some(panel) = self.panel(*t) else {
                continue;
            };
            for (a, r) in &panel.0 {
                if z.is_subspace_of(a) {
                    if let Ok(hi) = nodes.binary_search(r) {
                        edges.push((ti, hi));
                    }
                }
            }
        }
        let graph = Graph::from_edges(nodes.len(), edges);
        ZGraph { nodes, graph }
    }

    fn check_z(&self, z: &Subspace) -> Result<()> {
        if z.ambient() != self.n || z.dim() + 2 != self.n {
            return Err(Error::pre(format!(
                "z must be a subspace of dimension {}",
                self.n - 2
            )));
        }
        Ok(())
    }

    /// Checks the extension preconditions for `t` against the current state.
    pub fn triple_viability(&self, t: &Triple) -> Result<()> {
        self.check_z(&t.z)?;
        if t.x == t.y {
            return Err(Error::pre("endpoints coincide"));
        }
        let z = VRef::Sub(t.z.clone());
        for v in [&t.x, &t.y] {
            match self.type_of(v) {
                Some(ty) if ty + 1 >= self.n => {}
                _ => return Err(Error::pre(format!("{v:?} is not of type n-1 or n"))),
            }
            if !self.incident(v, &z) {
                return Err(Error::pre(format!("{v:?} is not incident with z")));
            }
        }
        let same = self.type_of(&t.x) == self.type_of(&t.y);
        if same != (self.m % 2 == 1) {
            return Err(Error::pre(
                "endpoint types must agree exactly when m is odd",
            ));
        }
        let extra: Vec<Subspace> = [&t.x, &t.y]
            .into_iter()
            .filter_map(|v| match v {
                VRef::Sub(s) => Some(s.clone()),
                VRef::New(_) => None,
            })
            .collect();
        let d = self.z_graph(&t.z, &extra).distance(&t.x, &t.y);
        if d < Length::Finite(self.m + 1) {
            return Err(Error::pre(format!("endpoints at distance {d}")));
        }
        Ok(())
    }

    pub fn is_viable(&self, t: &Triple) -> bool {
        self.triple_viability(t).is_ok()
    }

    /// Viable triples with `z` and the substrate endpoints up to `height`,
    /// ordered by `z` in enumeration order, then `x < y`. With `involving`,
    /// only triples with an endpoint among those new vertices.
    pub fn viable_triples(
        &self,
        height: i64,
        limit: usize,
        involving: Option<&[usize]>,
    ) -> Result<Vec<Triple>> {
        let mut out = Vec::new();
        if limit == 0 {
            return Ok(out);
        }
        let wanted = |v: &VRef| match (involving, v) {
            (None, _) => true,
            (Some(ids), VRef::New(id)) => ids.contains(id),
            (Some(_), VRef::Sub(_)) => false,
        };
        for z in self.substrate.subspaces_up_to(self.n - 2, height)? {
            let extra = self.substrate.hyperplanes_up_to(&z, height)?;
            let zg = self.z_graph(&z, &extra);
            for (a, x) in zg.nodes.iter().enumerate() {
                let ta = self.type_of(x);
                let dist = zg.graph.bfs(a);
                for (y, d) in zg.nodes.iter().zip(dist).skip(a + 1) {
                    if !wanted(x) && !wanted(y) {
                        continue;
                    }
                    if (ta == self.type_of(y)) != (self.m % 2 == 1) {
                        continue;
                    }
                    if d.is_none_or(|d| d > self.m) {
                        out.push(Triple {
                            z: z.clone(),
                            x: x.clone(),
                            y: y.clone(),
                        });
                        if out.len() == limit {
                            return Ok(out);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// A type-`(n-1)` vertex incident with `x` and `z` whose only type-`n`
    /// neighbor is `x`, with precursor outside `exclude`. Reuses an explicit
    /// panel entry when it qualifies and otherwise materializes an implicit
    /// one.
    pub fn select_fresh_panel_vertex(
        &mut self,
        x: usize,
        z: &Subspace,
        exclude: &BTreeSet<Subspace>,
    ) -> Result<VRef> {
        self.check_z(z)?;
        let panel = self
            .panel(x)
            .ok_or_else(|| Error::pre(format!("vertex {x} is not of type n")))?;
        let only_x = BTreeSet::from([x]);
        let mut skip = exclude.clone();
        for (a, r) in &panel.0 {
            if self.attachments(r) != only_x {
                skip.insert(a.clone());
            }
        }
        let a = self.substrate.hyperplanes_through(z, &skip, 1)?.remove(0);
        if let Some(r) = self.panel(x).unwrap().0.get(&a) {
            return Ok(r.clone());
        }
        let id = self.vertices.len();
        self.vertices.push(NewVertex::Hyper {
            precursor: a.clone(),
            attached: only_x,
        });
        if let NewVertex::Top { panel } = &mut self.vertices[x] {
            panel.0.insert(a, VRef::New(id));
        }
        Ok(VRef::New(id))
    }

    /// Makes `h` (type `n - 1`) incident with the new type-`n` vertex `t`.
    fn link(&mut self, t: usize, h: &VRef) -> Result<()> {
        let p = self
            .precursor(h)
            .cloned()
            .ok_or_else(|| Error::pre(format!("{h:?} is not of type n-1")))?;
        let NewVertex::Top { panel } = &mut self.vertices[t] else {
            return Err(Error::pre(format!("vertex {t} is not of type n")));
        };
        match panel.0.get(&p) {
            Some(r) if r != h => {
                return Err(Error::pre(format!(
                    "vertex {t} already has {r:?} over precursor {p:?}"
                )))
            }
            _ => {
                panel.0.insert(p.clone(), h.clone());
            }
        }
        match h {
            VRef::New(id) => {
                if let NewVertex::Hyper { attached, .. } = &mut self.vertices[*id] {
                    attached.insert(t);
                }
            }
            VRef::Sub(s) => {
                self.substrate_attached
                    .entry(s.clone())
                    .or_default()
                    .insert(t);
            }
        }
        Ok(())
    }

    /// Adds a path of length `m - 1` from `t.x` to `t.y` inside the residue
    /// at `t.z`. Returns the path and the precursors of its type-`(n-1)`
    /// vertices.
    pub fn extend(&mut self, t: &Triple) -> Result<(Vec<VRef>, Vec<usize>, Vec<Subspace>)> {
        self.triple_viability(t)?;
        let n = self.n;
        let m = self.m;
        let first = self.vertices.len();
        let tx = self.type_of(&t.x).unwrap();
        let ty = self.type_of(&t.y).unwrap();
        let type_at = |k: usize| {
            if k.is_multiple_of(2) {
                tx
            } else {
                2 * n - 1 - tx
            }
        };
        debug_assert_eq!(type_at(m - 1), ty);
        let mut path: Vec<Option<VRef>> = vec![None; m];
        path[0] = Some(t.x.clone());
        path[m - 1] = Some(t.y.clone());
        let mut used: BTreeSet<Subspace> = [&t.x, &t.y]
            .into_iter()
            .filter_map(|v| self.precursor(v).cloned())
            .collect();
        for (end, next) in [(0, 1), (m - 1, m - 2)] {
            if let Some(VRef::New(top)) = path[end].clone().filter(|_| type_at(end) == n) {
                let h = self.select_fresh_panel_vertex(top, &t.z, &used)?;
                used.insert(self.precursor(&h).unwrap().clone());
                path[next] = Some(h);
            }
        }
        let hyper_slots: Vec<usize> = (1..m - 1)
            .filter(|&k| path[k].is_none() && type_at(k) == n - 1)
            .collect();
        let fresh = self
            .substrate
            .hyperplanes_through(&t.z, &used, hyper_slots.len())?;
        for (k, precursor) in hyper_slots.into_iter().zip(fresh) {
            let id = self.vertices.len();
            self.vertices.push(NewVertex::Hyper {
                precursor,
                attached: BTreeSet::new(),
            });
            path[k] = Some(VRef::New(id));
        }
        for slot in path.iter_mut().take(m - 1).skip(1) {
            if slot.is_none() {
                let id = self.vertices.len();
                self.vertices.push(NewVertex::Top {
                    panel: Panel::default(),
                });
                *slot = Some(VRef::New(id));
            }
        }
        let path: Vec<VRef> = path.into_iter().map(Option::unwrap).collect();
        for k in 0..m - 1 {
            let (a, b) = (&path[k], &path[k + 1]);
            let (top, hyper) = if type_at(k) == n { (a, b) } else { (b, a) };
            let VRef::New(top) = top else {
                unreachable!("type-n vertices are new")
            };
            self.link(*top, hyper)?;
        }
        let precursors = path
            .iter()
            .enumerate()
            .filter(|(k, _)| type_at(*k) == n - 1)
            .map(|(_, v)| self.precursor(v).unwrap().clone())
            .collect();
        let created = (first..self.vertices.len()).collect();
        Ok((path, created, precursors))
    }

    /// Runs `steps` scheduler steps.
    pub fn run_cn(
        &mut self,
        steps: usize,
        height: i64,
        limit: usize,
        check_every_step: bool,
    ) -> Result<()> {
        self.height = self.height.max(height);
        self.limit = limit;
        if self.schedule.lists.is_empty() {
            let triples = self.viable_triples(self.height, limit, None)?;
            self.schedule.lists.push(TripleList {
                involving: None,
                triples,
                cursor: 0,
            });
        }
        for _ in 0..steps {
            self.run_step()?;
            if check_every_step {
                self.assert_properties(&format!("step {}", self.step))?;
            }
        }
        self.assert_properties("run")
    }

    fn run_step(&mut self) -> Result<()> {
        let j = self.step + 1;
        let k = nu2(j);
        let (triple, invalidated) = self.next_triple(k)?;
        let mut record = StepRecord {
            step: j,
            list: k,
            triple: triple.clone(),
            invalidated,
            path: Vec::new(),
            created: Vec::new(),
            precursors: Vec::new(),
            height: self.height,
        };
        if let Some(t) = triple {
            let (path, created, precursors) = self.extend(&t)?;
            self.schedule.applied.insert(t);
            record.path = path;
            record.created = created;
            record.precursors = precursors;
        }
        let triples = self.viable_triples(self.height, self.limit, Some(&record.created))?;
        self.schedule.lists.push(TripleList {
            involving: Some(record.created.clone()),
            triples,
            cursor: 0,
        });
        self.log.push(record);
        self.step = j;
        self.sweep_cursors();
        Ok(())
    }

    fn is_handled(&self, t: &Triple) -> bool {
        self.schedule.applied.contains(t) || !self.is_viable(t)
    }

    /// First unhandled triple of `S_k`, raising the height and refilling
    /// the list when it runs dry.
    fn next_triple(&mut self, k: usize) -> Result<(Option<Triple>, usize)> {
        let mut invalidated = 0;
        let mut refills = 0;
        loop {
            let list = &self.schedule.lists[k];
            if list.cursor < list.triples.len() {
                let t = list.triples[list.cursor].clone();
                self.schedule.lists[k].cursor += 1;
                if self.is_handled(&t) {
                    invalidated += 1;
                    continue;
                }
                return Ok((Some(t), invalidated));
            }
            if refills == MAX_REFILLS {
                return Ok((None, invalidated));
            }
            refills += 1;
            self.height += 1;
            let involving = self.schedule.lists[k].involving.clone();
            let fresh = self.viable_triples(self.height, usize::MAX, involving.as_deref())?;
            let list = &mut self.schedule.lists[k];
            let known: BTreeSet<Triple> = list.triples.iter().cloned().collect();
            let mut added = 0;
            for t in fresh {
                if added == self.limit {
                    break;
                }
                if !known.contains(&t) {
                    list.triples.push(t);
                    added += 1;
                }
            }
        }
    }

    /// Moves every cursor past triples that have been applied or are no
    /// longer viable.
    fn sweep_cursors(&mut self) {
        for k in 0..self.schedule.lists.len() {
            loop {
                let list = &self.schedule.lists[k];
                if list.cursor >= list.triples.len() || !self.is_handled(&list.triples[list.cursor])
                {
                    break;
                }
                self.schedule.lists[k].cursor += 1;
            }
        }
    }

    fn assert_properties(&self, context: &str) -> Result<()> {
        match check_cn_properties(self)?
            .into_iter()
            .find(|v| !v.is_pass())
        {
            Some(v) => Err(Error::InvariantViolation {
                context: context.to_string(),
                verdict: Box::new(v),
            }),
            None => Ok(()),
        }
    }

    /// Every `z` at which a cycle of the materialized graph could live: the
    /// meets of pairs of explicit panel precursors of one type-`n` vertex,
    /// plus the `z` of every applied triple.
    pub fn referenced_z(&self) -> BTreeSet<Subspace> {
        let mut out: BTreeSet<Subspace> = self
            .log
            .iter()
            .filter_map(|r| r.triple.as_ref().map(|t| t.z.clone()))
            .collect();
        for t in self.tops() {
            let keys: Vec<&Subspace> = self.panel(t).unwrap().0.keys().collect();
            for (i, p) in keys.iter().enumerate() {
                for q in &keys[i + 1..] {
                    if let Some(z) = p.intersection(q) {
                        out.insert(z);
                    }
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// The starting state: the substrate, one new type-`(n-1)` vertex with
/// precursor `span{e_1..e_{n-1}}`, and one type-`n` vertex with an
/// entirely implicit panel.
pub fn init_lambda0(n: usize, m: Bond) -> Result<CnState> {
    let m = match m {
        Bond::Finite(m) if m >= 4 => m as usize,
        other => return Err(Error::pre(format!("need 4 <= m < inf, got {other}"))),
    };
    let substrate = SubstrateHandle::new(n)?;
    let a = Subspace::coordinate(n, &(1..n).collect::<Vec<_>>())?;
    Ok(CnState {
        n,
        m,
        substrate,
        vertices: vec![
            NewVertex::Hyper {
                precursor: a,
                attached: BTreeSet::new(),
            },
            NewVertex::Top {
                panel: Panel::default(),
            },
        ],
        substrate_attached: BTreeMap::new(),
        schedule: Schedule::default(),
        step: 0,
        height: 1,
        limit: 0,
        log: Vec::new(),
    })
}

fn detail(property: &str, message: String) -> Verdict {
    Verdict::fail(property, Witness::Detail { message })
}

/// Lower subspaces used to spot-check incidences: for each dimension up to
/// `n - 2`, everything of height 1.
fn low_sample(s: &CnState) -> Result<Vec<Subspace>> {
    let mut out = Vec::new();
    for k in 1..=s.n - 2 {
        out.extend(s.substrate.subspaces_up_to(k, 1)?);
    }
    Ok(out)
}

/// Hyperplanes sampled per type-`n` vertex by the (C) check.
const PANEL_SAMPLE: usize = 8;

/// Verdicts for the six properties, in the order F, I, V, P, H, C.
pub fn check_cn_properties(s: &CnState) -> Result<Vec<Verdict>> {
    let low = low_sample(s)?;
    let mut zs = s.referenced_z();
    zs.extend(s.substrate.subspaces_up_to(s.n - 2, 1)?);
    let low: Vec<Subspace> = low.into_iter().chain(zs.iter().cloned()).collect();
    Ok(vec![
        check_f(s, &low),
        Verdict::pass("I"),
        check_v(s),
        check_p(s, &zs),
        check_h(s, &low),
        check_c(s)?,
    ])
}

fn check_f(s: &CnState, low: &[Subspace]) -> Verdict {
    for t in s.tops() {
        for l in low {
            if !s.incident(&VRef::New(t), &VRef::Sub(l.clone())) {
                return detail("F", format!("type-n vertex {t} not incident with {l:?}"));
            }
        }
    }
    Verdict::pass("F")
}

fn check_v(s: &CnState) -> Verdict {
    for h in s.hypers() {
        let p = s.precursor_of_new(h).unwrap();
        if p.ambient() != s.n || p.dim() + 1 != s.n {
            return detail(
                "V",
                format!("vertex {h} has precursor {p:?} of wrong dimension"),
            );
        }
    }
    Verdict::pass("V")
}

fn check_p(s: &CnState, zs: &BTreeSet<Subspace>) -> Verdict {
    let need = 2 * s.m;
    for z in zs {
        let zg = s.z_graph(z, &[]);
        if let Some(cycle) = zg.graph.shortest_cycle() {
            if cycle.len() < need {
                let cycle: Vec<&VRef> = cycle.iter().map(|&k| &zg.nodes[k]).collect();
                return detail(
                    "P",
                    format!("cycle of length {} at {z:?}: {cycle:?}", cycle.len()),
                );
            }
        }
    }
    Verdict::pass("P")
}

fn check_h(s: &CnState, low: &[Subspace]) -> Verdict {
    for h in s.hypers() {
        let p = s.precursor_of_new(h).unwrap();
        for l in low {
            if s.incident(&VRef::New(h), &VRef::Sub(l.clone())) != l.is_subspace_of(p) {
                return detail(
                    "H",
                    format!("vertex {h} disagrees with its precursor on {l:?}"),
                );
            }
        }
    }
    Verdict::pass("H")
}

fn check_c(s: &CnState) -> Result<Verdict> {
    // Type-(n-1) vertices incident with each type-n vertex, from their side.
    let mut seen: BTreeMap<(usize, Subspace), Vec<VRef>> = BTreeMap::new();
    for h in s.hypers() {
        let NewVertex::Hyper {
            precursor,
            attached,
        } = &s.vertices[h]
        else {
            unreachable!()
        };
        for &t in attached {
            seen.entry((t, precursor.clone()))
                .or_default()
                .push(VRef::New(h));
        }
    }
    for (a, att) in &s.substrate_attached {
        for &t in att {
            seen.entry((t, a.clone()))
                .or_default()
                .push(VRef::Sub(a.clone()));
        }
    }
    let mut probe = s.substrate.clone();
    let sample = probe.hyperplanes(&BTreeSet::new(), PANEL_SAMPLE)?;
    for t in s.tops() {
        let panel = &s.panel(t).unwrap().0;
        let mut values = BTreeSet::new();
        for (a, r) in panel {
            if !values.insert(r) {
                return Ok(detail(
                    "C",
                    format!("panel of {t} maps two hyperplanes to {r:?}"),
                ));
            }
            if s.precursor(r) != Some(a) {
                return Ok(detail(
                    "C",
                    format!("panel of {t} maps {a:?} to {r:?} with another precursor"),
                ));
            }
            if !s.attachments(r).contains(&t) {
                return Ok(detail(
                    "C",
                    format!("{r:?} is in the panel of {t} but not attached"),
                ));
            }
        }
        for a in panel.keys().chain(&sample) {
            let found = seen.get(&(t, a.clone())).map_or(0, Vec::len);
            let explicit = panel.contains_key(a);
            if found > 1 || found != usize::from(explicit) {
                return Ok(detail(
                    "C",
                    format!("vertex {t} has {found} incident vertices with precursor {a:?}"),
                ));
            }
        }
    }
    for ((t, a), rs) in &seen {
        if s.panel(*t).and_then(|p| p.0.get(a)) != rs.first() {
            return Ok(detail(
                "C",
                format!("{:?} attached to {t} outside its panel", rs[0]),
            ));
        }
    }
    Ok(Verdict::pass("C"))
}

/// Checks that the residue of the type-`n` vertex `x` looks like the
/// projective space on `sample` hyperplanes: explicit panel entries first,
/// then hyperplanes in enumeration order.
pub fn verify_type_n_residue(s: &CnState, x: usize, sample: usize) -> Result<Verdict> {
    const NAME: &str = "typeNResidue";
    let panel = &s
        .panel(x)
        .ok_or_else(|| Error::pre(format!("vertex {x} is not of type n")))?
        .0;
    let mut hyperplanes: Vec<Subspace> = panel.keys().take(sample).cloned().collect();
    if hyperplanes.len() < sample {
        let skip: BTreeSet<Subspace> = hyperplanes.iter().cloned().collect();
        let mut probe = s.substrate.clone();
        hyperplanes.extend(probe.hyperplanes(&skip, sample - hyperplanes.len())?);
    }
    let low = low_sample(s)?;
    let top = VRef::New(x);
    let mut images = BTreeSet::new();
    let mut probe = s.substrate.clone();
    for a in &hyperplanes {
        let image = panel.get(a).cloned();
        if let Some(r) = &image {
            if !images.insert(r.clone()) {
                return Ok(detail(
                    NAME,
                    format!("{r:?} is the panel vertex of two hyperplanes"),
                ));
            }
            if s.precursor(r) != Some(a) || !s.incident(r, &top) {
                return Ok(detail(
                    NAME,
                    format!("panel vertex {r:?} does not match {a:?}"),
                ));
            }
        }
        // An implicit panel vertex has precursor `a` by definition; check
        // the explicit one against nesting.
        let inside = probe.subspaces_within(a, a.dim() - 1, 2)?;
        for l in low.iter().chain(&inside) {
            let expected = l.is_subspace_of(a);
            let actual = match &image {
                Some(r) => s.incident(r, &VRef::Sub(l.clone())),
                None => expected,
            };
            if actual != expected {
                return Ok(detail(NAME, format!("panel vertex over {a:?} and {l:?}")));
            }
            if !s.incident(&top, &VRef::Sub(l.clone())) {
                return Ok(detail(NAME, format!("{l:?} is not in the residue")));
            }
        }
    }
    Ok(Verdict::pass(NAME))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sub(n: usize, ks: &[usize]) -> Subspace {
        Subspace::coordinate(n, ks).unwrap()
    }

    fn all_pass(s: &CnState) -> bool {
        check_cn_properties(s).unwrap().iter().all(Verdict::is_pass)
    }

    #[test]
    fn init_state() {
        let s = init_lambda0(3, Bond::Finite(4)).unwrap();
        assert_eq!(s.type_n_count(), 1);
        assert_eq!(s.hypers().count(), 1);
        assert_eq!(s.precursor(&VRef::New(0)), Some(&sub(3, &[1, 2])));
        assert!(all_pass(&s));
        assert!(init_lambda0(3, Bond::Finite(3)).is_err());
        assert!(init_lambda0(3, Bond::Infinite).is_err());
    }

    #[test]
    fn nu2_sequence() {
        let v: Vec<usize> = (1..=8).map(nu2).collect();
        assert_eq!(v, vec![0, 1, 0, 2, 0, 1, 0, 3]);
    }

    #[test]
    fn initial_triples() {
        let s = init_lambda0(3, Bond::Finite(4)).unwrap();
        let t = s.viable_triples(1, 100, None).unwrap();
        assert!(!t.is_empty());
        assert!(t.iter().all(|t| t.x == VRef::New(1) || t.y == VRef::New(1)));
        assert!(s.viable_triples(1, 0, None).unwrap().is_empty());
        // With m odd the lone new type-(n-1) vertex pairs only with other
        // type-(n-1) vertices.
        let h = init_lambda0(3, Bond::Finite(5)).unwrap();
        let t = h.viable_triples(1, 1000, None).unwrap();
        assert!(t.iter().all(|t| h.type_of(&t.x) == h.type_of(&t.y)));
    }

    #[test]
    fn fresh_panel_vertices() {
        let mut s = init_lambda0(3, Bond::Finite(4)).unwrap();
        let z = sub(3, &[1]);
        let v = s
            .select_fresh_panel_vertex(1, &z, &BTreeSet::new())
            .unwrap();
        assert_eq!(s.precursor(&v), Some(&sub(3, &[1, 2])));
        // Reused while it stays a leaf.
        let again = s
            .select_fresh_panel_vertex(1, &z, &BTreeSet::new())
            .unwrap();
        assert_eq!(v, again);
        let excl = BTreeSet::from([sub(3, &[1, 2])]);
        let w = s.select_fresh_panel_vertex(1, &z, &excl).unwrap();
        assert_eq!(s.precursor(&w), Some(&sub(3, &[1, 3])));
        assert!(s
            .select_fresh_panel_vertex(1, &sub(3, &[1, 2]), &excl)
            .is_err());
        assert!(all_pass(&s));
    }

    #[test]
    fn extend_from_bootstrap() {
        let mut s = init_lambda0(3, Bond::Finite(4)).unwrap();
        let t = Triple {
            z: sub(3, &[1]),
            x: VRef::New(1),
            y: VRef::Sub(sub(3, &[1, 2])),
        };
        let (path, created, precursors) = s.extend(&t).unwrap();
        assert_eq!(path.len(), 4);
        assert_eq!(s.type_n_count(), 2);
        assert_eq!(created.len(), 2);
        assert_eq!(precursors, vec![sub(3, &[1, 3]), sub(3, &[1, 2])]);
        let zg = s.z_graph(&t.z, &[]);
        assert_eq!(zg.distance(&t.x, &t.y), Length::Finite(3));
        assert!(all_pass(&s));
        assert!(s.extend(&t).is_err());
    }

    #[test]
    fn extend_h3_shape() {
        let mut s = init_lambda0(3, Bond::Finite(5)).unwrap();
        let t = Triple {
            z: sub(3, &[1]),
            x: VRef::New(0),
            y: VRef::Sub(sub(3, &[1, 3])),
        };
        let (path, created, _) = s.extend(&t).unwrap();
        assert_eq!(path.len(), 5);
        let types: Vec<usize> = created
            .iter()
            .map(|&c| s.type_of(&VRef::New(c)).unwrap())
            .collect();
        assert_eq!(types.iter().filter(|&&t| t == 3).count(), 2);
        assert_eq!(types.iter().filter(|&&t| t == 2).count(), 1);
        assert!(all_pass(&s));
    }

    #[test]
    fn corrupted_panel_fails_c() {
        let mut s = init_lambda0(3, Bond::Finite(4)).unwrap();
        let z = sub(3, &[1]);
        let v = s
            .select_fresh_panel_vertex(1, &z, &BTreeSet::new())
            .unwrap();
        if let NewVertex::Top { panel } = &mut s.vertices[1] {
            panel.0.insert(sub(3, &[2, 3]), v);
        }
        let c = check_cn_properties(&s).unwrap().pop().unwrap();
        assert!(!c.is_pass());
    }

    #[test]
    fn short_cycle_fails_p() {
        // Two type-3 vertices sharing two type-2 vertices over z = e1: a
        // 4-cycle, hence girth 4 < 8.
        let mut s = init_lambda0(3, Bond::Finite(4)).unwrap();
        s.vertices.push(NewVertex::Top {
            panel: Panel::default(),
        });
        let a = VRef::Sub(sub(3, &[1, 2]));
        let b = VRef::Sub(sub(3, &[1, 3]));
        for t in [1, 2] {
            s.link(t, &a).unwrap();
            s.link(t, &b).unwrap();
        }
        let p = &check_cn_properties(&s).unwrap()[3];
        assert_eq!(p.property, "P");
        assert!(!p.is_pass());
    }

    #[test]
    fn residue_of_type_n_vertices() {
        let mut s = init_lambda0(3, Bond::Finite(4)).unwrap();
        assert!(verify_type_n_residue(&s, 1, 20).unwrap().is_pass());
        assert!(verify_type_n_residue(&s, 1, 0).unwrap().is_pass());
        let v = s
            .select_fresh_panel_vertex(1, &sub(3, &[1]), &BTreeSet::new())
            .unwrap();
        assert!(verify_type_n_residue(&s, 1, 20).unwrap().is_pass());
        let VRef::New(h) = v else { panic!() };
        if let NewVertex::Hyper { precursor, .. } = &mut s.vertices[h] {
            *precursor = sub(3, &[2, 3]);
        }
        assert!(!verify_type_n_residue(&s, 1, 20).unwrap().is_pass());
    }

    #[test]
    fn short_run() {
        let mut s = init_lambda0(3, Bond::Finite(4)).unwrap();
        s.run_cn(0, 1, 20, true).unwrap();
        assert_eq!(s.step, 0);
        s.run_cn(6, 1, 20, true).unwrap();
        let lists: Vec<usize> = s.log.iter().map(|r| r.list).collect();
        assert_eq!(lists, vec![0, 1, 0, 2, 0, 1]);
        assert!(s.log.iter().all(|r| r.triple.is_some()));
        for r in &s.log {
            let set: BTreeSet<_> = r.precursors.iter().collect();
            assert_eq!(set.len(), r.precursors.len());
        }
        let back = CnState::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }
}
