//! The free construction for diagrams without `A3` subdiagrams.
//!
//! A [`ConstructionState`] holds a finite stage `Δ_k`. Three procedures
//! extend it: completing a flag by one vertex (A), adding a path between two
//! far-apart vertices of a residue (B), and joining two components of a
//! disconnected residue (C). A round snapshots every viable task of the
//! current stage, up to per-procedure caps, and applies them in canonical
//! order, re-checking viability right before each application.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::diagram::{Bond, CoxeterDiagram};
use crate::error::{Error, Result};
use crate::geometry::{Flag, Geometry, VertexId};
use crate::graph::Length;
use crate::properties;
use crate::verdict::Verdict;

/// Maximum number of tasks per procedure kind and round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub a: usize,
    pub b: usize,
    pub c: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            a: 64,
            b: 64,
            c: 64,
        }
    }
}

impl Caps {
    pub fn zero() -> Self {
        Self { a: 0, b: 0, c: 0 }
    }

    pub fn only_b(b: usize) -> Self {
        Self { a: 0, b, c: 0 }
    }
}

/// One application of a procedure. Types are indices into the diagram's
/// type list.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "procedure")]
pub enum Task {
    A {
        flag: Flag,
        #[serde(rename = "type")]
        ty: usize,
    },
    B {
        flag: Flag,
        i: usize,
        j: usize,
        x: VertexId,
        y: VertexId,
    },
    C {
        flag: Flag,
        i: usize,
        j: usize,
        x: VertexId,
        y: VertexId,
    },
}

impl Task {
    pub fn kind(&self) -> usize {
        match self {
            Task::A { .. } => 0,
            Task::B { .. } => 1,
            Task::C { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskRecord {
    /// Stage produced by the round that applied the task.
    pub stage: usize,
    pub task: Task,
    pub created: Vec<VertexId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundReport {
    pub stage: usize,
    /// Per procedure kind A, B, C.
    pub enumerated: [usize; 3],
    pub applied: [usize; 3],
    pub skipped: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructionState {
    pub geometry: Geometry,
    pub diagram: CoxeterDiagram,
    pub stage: usize,
    pub task_log: Vec<TaskRecord>,
    pub rounds: Vec<RoundReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BondDiameter {
    pub types: [String; 2],
    pub sampled: usize,
    /// Largest finite distance inside any sampled residue.
    pub max_finite_diameter: Option<usize>,
}

/// Distance of a stage from the properties of the direct limit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgressMetrics {
    pub vertices: usize,
    pub incidences: usize,
    pub flags: usize,
    pub non_completable: usize,
    pub corank1_flags: usize,
    pub non_thick_corank1: usize,
    pub corank2_flags: usize,
    pub disconnected_residues: usize,
    pub bond_diameters: Vec<BondDiameter>,
}

impl ProgressMetrics {
    pub fn non_thick_ratio(&self) -> f64 {
        ratio(self.non_thick_corank1, self.corank1_flags)
    }

    pub fn disconnected_ratio(&self) -> f64 {
        ratio(self.disconnected_residues, self.corank2_flags)
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

const DIAMETER_SAMPLES: usize = 16;

impl ConstructionState {
    /// Wraps a seed after checking the diagram and the stage invariants.
    pub fn new(diagram: CoxeterDiagram, seed: Geometry) -> Result<Self> {
        if diagram.has_subdiagram_a3() {
            return Err(Error::pre("the diagram contains an A3 subdiagram"));
        }
        seed.require_types(&diagram)?;
        if let Some(v) = properties::fpd_failure(&seed, &diagram)? {
            return Err(Error::InvariantViolation {
                context: "seed geometry".into(),
                verdict: Box::new(v),
            });
        }
        Ok(Self {
            geometry: seed,
            diagram,
            stage: 0,
            task_log: Vec::new(),
            rounds: Vec::new(),
        })
    }

    pub fn empty(diagram: CoxeterDiagram) -> Result<Self> {
        let seed = Geometry::over(&diagram);
        Self::new(diagram, seed)
    }

    /// Adds one vertex of type `ty` completing `flag`.
    pub fn procedure_a(&mut self, flag: &Flag, ty: usize) -> Result<Vec<VertexId>> {
        self.a_viability(flag, ty)?;
        Ok(self.add_path(flag, &[], &[ty]))
    }

    /// Joins `x` and `y` by a path of `m - 1` edges alternating types `i`
    /// and `j` inside the residue of `flag`.
    pub fn procedure_b(
        &mut self,
        flag: &Flag,
        i: usize,
        j: usize,
        x: VertexId,
        y: VertexId,
    ) -> Result<Vec<VertexId>> {
        let m = self.b_viability(flag, i, j, x, y)?;
        let tx = self.geometry.type_of(x);
        let other = if tx == i { j } else { i };
        // Path x_1 = x, ..., x_m = y; interior x_2 .. x_{m-1}.
        let interior: Vec<usize> = (2..m)
            .map(|k| if k % 2 == 1 { tx } else { other })
            .collect();
        Ok(self.add_path(flag, &[x, y], &interior))
    }

    /// Joins `x` and `y`, lying in different components of the residue of
    /// `flag`, by an alternating path of length 4 (equal types) or 5.
    pub fn procedure_c(
        &mut self,
        flag: &Flag,
        i: usize,
        j: usize,
        x: VertexId,
        y: VertexId,
    ) -> Result<Vec<VertexId>> {
        self.c_viability(flag, i, j, x, y)?;
        let tx = self.geometry.type_of(x);
        let other = if tx == i { j } else { i };
        let len = if self.geometry.type_of(y) == tx { 4 } else { 5 };
        let interior: Vec<usize> = (1..len)
            .map(|k| if k % 2 == 0 { tx } else { other })
            .collect();
        Ok(self.add_path(flag, &[x, y], &interior))
    }

    pub fn apply(&mut self, task: &Task) -> Result<Vec<VertexId>> {
        match task {
            Task::A { flag, ty } => self.procedure_a(flag, *ty),
            Task::B { flag, i, j, x, y } => self.procedure_b(flag, *i, *j, *x, *y),
            Task::C { flag, i, j, x, y } => self.procedure_c(flag, *i, *j, *x, *y),
        }
    }

    pub fn is_viable(&self, task: &Task) -> bool {
        match task {
            Task::A { flag, ty } => self.a_viability(flag, *ty).is_ok(),
            Task::B { flag, i, j, x, y } => self.b_viability(flag, *i, *j, *x, *y).is_ok(),
            Task::C { flag, i, j, x, y } => self.c_viability(flag, *i, *j, *x, *y).is_ok(),
        }
    }

    /// Creates the interior vertices of a path (or a single vertex when
    /// `ends` is empty). New vertices are incident with their path
    /// neighbors, every member of `flag`, and every vertex whose type is
    /// distinct from and not adjacent to theirs.
    fn add_path(&mut self, flag: &Flag, ends: &[VertexId], interior: &[usize]) -> Vec<VertexId> {
        let created: Vec<VertexId> = interior
            .iter()
            .map(|&t| self.geometry.add_vertex(t))
            .collect();
        let mut chain = Vec::with_capacity(created.len() + 2);
        if let Some(&x) = ends.first() {
            chain.push(x);
        }
        chain.extend(&created);
        if let Some(&y) = ends.get(1) {
            chain.push(y);
        }
        let g = &mut self.geometry;
        for w in chain.windows(2) {
            g.add_incidence(w[0], w[1]).expect("path alternates types");
        }
        for &v in &created {
            for &u in flag.ids() {
                g.add_incidence(v, u)
                    .expect("flag types differ from path types");
            }
            let forced = self.diagram.forced_mask(g.type_of(v));
            if forced != 0 {
                for u in 0..g.len() {
                    if u != v && forced & (1 << g.type_of(u)) != 0 {
                        g.add_incidence(v, u).expect("forced types differ");
                    }
                }
            }
        }
        created
    }

    fn check_type(&self, t: usize) -> Result<()> {
        if t >= self.diagram.rank() {
            return Err(Error::pre(format!("type index {t} out of range")));
        }
        Ok(())
    }

    fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v >= self.geometry.len() {
            return Err(Error::pre(format!("vertex {v} does not exist")));
        }
        Ok(())
    }

    fn in_residue(&self, flag: &Flag, v: VertexId) -> bool {
        flag.ids().iter().all(|&u| self.geometry.incident(u, v))
    }

    fn a_viability(&self, flag: &Flag, ty: usize) -> Result<()> {
        self.check_type(ty)?;
        self.geometry.check_flag(flag)?;
        if self.geometry.flag_mask(flag.ids()) & (1 << ty) != 0 {
            return Err(Error::pre(format!(
                "the flag already has a vertex of type {ty}"
            )));
        }
        Ok(())
    }

    /// Checks every precondition of procedure B and returns `m`.
    fn b_viability(
        &self,
        flag: &Flag,
        i: usize,
        j: usize,
        x: VertexId,
        y: VertexId,
    ) -> Result<usize> {
        self.check_type(i)?;
        self.check_type(j)?;
        self.check_vertex(x)?;
        self.check_vertex(y)?;
        if i == j || !self.diagram.is_adjacent(i, j) {
            return Err(Error::pre("procedure B needs two adjacent types"));
        }
        let m = match self.diagram.bond(i, j) {
            Bond::Finite(m) => m as usize,
            Bond::Infinite => return Err(Error::pre("procedure B needs a finite bond")),
        };
        self.geometry.check_flag(flag)?;
        if self.geometry.flag_mask(flag.ids()) != self.diagram.neighborhood_mask(i, j) {
            return Err(Error::pre(
                "the flag type must be exactly the neighborhood of {i, j}",
            ));
        }
        let (tx, ty) = (self.geometry.type_of(x), self.geometry.type_of(y));
        if ![i, j].contains(&tx) || ![i, j].contains(&ty) {
            return Err(Error::pre("endpoints must have type i or j"));
        }
        if (tx == ty) != (m % 2 == 1) {
            return Err(Error::pre(format!(
                "endpoint types must agree exactly when m = {m} is odd"
            )));
        }
        if !self.in_residue(flag, x) || !self.in_residue(flag, y) {
            return Err(Error::pre("endpoints must lie in the residue of the flag"));
        }
        let view = self.geometry.residue_rank2(flag.ids(), i, j);
        let dist = view.distance(x, y)?;
        if dist < Length::Finite(m + 1) {
            return Err(Error::pre(format!(
                "endpoints at distance {dist} < {}",
                m + 1
            )));
        }
        Ok(m)
    }

    fn c_viability(&self, flag: &Flag, i: usize, j: usize, x: VertexId, y: VertexId) -> Result<()> {
        self.check_type(i)?;
        self.check_type(j)?;
        self.check_vertex(x)?;
        self.check_vertex(y)?;
        self.geometry.check_flag(flag)?;
        let mask = self.geometry.flag_mask(flag.ids());
        if i == j || mask & (1 << i) != 0 || mask & (1 << j) != 0 {
            return Err(Error::pre(
                "procedure C needs two distinct types outside the flag",
            ));
        }
        if self.diagram.rank() - flag.len() < 2 {
            return Err(Error::pre("procedure C needs a flag of corank at least 2"));
        }
        let (tx, ty) = (self.geometry.type_of(x), self.geometry.type_of(y));
        if ![i, j].contains(&tx) || ![i, j].contains(&ty) {
            return Err(Error::pre("endpoints must have type i or j"));
        }
        if !self.in_residue(flag, x) || !self.in_residue(flag, y) {
            return Err(Error::pre("endpoints must lie in the residue of the flag"));
        }
        let residue = self.geometry.residue_vertices(flag.ids());
        let (_, label) = self.geometry.subgraph(&residue).components();
        let lx = residue.binary_search(&x).unwrap();
        let ly = residue.binary_search(&y).unwrap();
        if label[lx] == label[ly] {
            return Err(Error::pre(
                "endpoints already lie in one component of the residue",
            ));
        }
        Ok(())
    }

    /// Viable tasks of the current stage in canonical order, truncated per
    /// kind by `caps`.
    pub fn enumerate_tasks(&self, caps: Caps) -> Vec<Task> {
        let mut tasks = self.a_tasks(caps.a);
        tasks.extend(self.b_tasks(caps.b));
        tasks.extend(self.c_tasks(caps.c));
        tasks
    }

    fn a_tasks(&self, cap: usize) -> Vec<Task> {
        let g = &self.geometry;
        let mut out = Vec::new();
        if cap == 0 {
            return out;
        }
        for rank in 0..g.rank() {
            let flow = g.for_each_flag_of_rank(rank, |flag| {
                let mask = g.flag_mask(flag);
                for ty in (0..g.rank()).filter(|t| mask & (1 << t) == 0) {
                    out.push(Task::A {
                        flag: Flag::from(flag),
                        ty,
                    });
                    if out.len() == cap {
                        return ControlFlow::Break(());
                    }
                }
                ControlFlow::Continue(())
            });
            if flow.is_break() {
                break;
            }
        }
        out
    }

    fn b_tasks(&self, cap: usize) -> Vec<Task> {
        let g = &self.geometry;
        let d = &self.diagram;
        let mut out = Vec::new();
        if cap == 0 {
            return out;
        }
        let mut contexts = Vec::new();
        for (i, j) in d.adjacent_pairs() {
            if d.bond(i, j).finite().is_some() {
                for flag in g.flags_of_type(d.neighborhood_mask(i, j)) {
                    contexts.push((flag, i, j));
                }
            }
        }
        contexts.sort();
        for (flag, i, j) in contexts {
            let m = d.bond(i, j).finite().unwrap() as usize;
            let view = g.residue_rank2(flag.ids(), i, j);
            let verts = view.vertices();
            for a in 0..verts.len() {
                let dist = view.graph().bfs(a);
                for b in a + 1..verts.len() {
                    let same = g.type_of(verts[a]) == g.type_of(verts[b]);
                    if same != (m % 2 == 1) {
                        continue;
                    }
                    if dist[b].is_none_or(|d| d > m) {
                        out.push(Task::B {
                            flag: flag.clone(),
                            i,
                            j,
                            x: verts[a],
                            y: verts[b],
                        });
                        if out.len() == cap {
                            return out;
                        }
                    }
                }
            }
        }
        out
    }

    fn c_tasks(&self, cap: usize) -> Vec<Task> {
        let g = &self.geometry;
        let mut out = Vec::new();
        if cap == 0 || g.rank() < 2 {
            return out;
        }
        let _ = g.for_each_flag(|flag| {
            if g.rank() - flag.len() < 2 {
                return ControlFlow::Continue(());
            }
            let residue = g.residue_vertices(flag);
            let (count, label) = g.subgraph(&residue).components();
            if count < 2 {
                return ControlFlow::Continue(());
            }
            let mut reps = vec![usize::MAX; count];
            for (k, &v) in residue.iter().enumerate() {
                if reps[label[k]] == usize::MAX {
                    reps[label[k]] = v;
                }
            }
            let mask = g.flag_mask(flag);
            for a in 0..count {
                for b in a + 1..count {
                    let (x, y) = (reps[a], reps[b]);
                    let (i, j) = self.c_types(mask, x, y);
                    out.push(Task::C {
                        flag: Flag::from(flag),
                        i,
                        j,
                        x,
                        y,
                    });
                    if out.len() == cap {
                        return ControlFlow::Break(());
                    }
                }
            }
            ControlFlow::Continue(())
        });
        out
    }

    /// Path types for a C-task: the endpoint types, or for equal endpoint
    /// types a partner outside the flag, preferring one adjacent to it.
    fn c_types(&self, flag_mask: u64, x: VertexId, y: VertexId) -> (usize, usize) {
        let tx = self.geometry.type_of(x);
        let ty = self.geometry.type_of(y);
        if tx != ty {
            return (tx, ty);
        }
        let free: Vec<usize> = (0..self.diagram.rank())
            .filter(|&t| t != tx && flag_mask & (1 << t) == 0)
            .collect();
        let partner = free
            .iter()
            .copied()
            .find(|&t| self.diagram.is_adjacent(tx, t))
            .unwrap_or(free[0]);
        (tx, partner)
    }

    /// Runs one round `Δ_k -> Δ_{k+1}`.
    pub fn run_round(&mut self, caps: Caps, check_every_task: bool) -> Result<RoundReport> {
        let tasks = self.enumerate_tasks(caps);
        let stage = self.stage + 1;
        let mut report = RoundReport {
            stage,
            ..RoundReport::default()
        };
        for task in tasks {
            let kind = task.kind();
            report.enumerated[kind] += 1;
            if !self.is_viable(&task) {
                report.skipped[kind] += 1;
                continue;
            }
            let created = self.apply(&task)?;
            report.applied[kind] += 1;
            if check_every_task {
                self.assert_invariants(&format!("{task:?}"))?;
            }
            self.task_log.push(TaskRecord {
                stage,
                task,
                created,
            });
        }
        self.assert_invariants(&format!("round {stage}"))?;
        self.stage = stage;
        self.rounds.push(report.clone());
        Ok(report)
    }

    fn assert_invariants(&self, context: &str) -> Result<()> {
        match properties::fpd_failure(&self.geometry, &self.diagram)? {
            Some(v) => Err(Error::InvariantViolation {
                context: context.to_string(),
                verdict: Box::new(v),
            }),
            None => Ok(()),
        }
    }

    pub fn check_invariants(&self) -> Result<Vec<Verdict>> {
        properties::check_fpd(&self.geometry, &self.diagram)
    }

    pub fn progress_metrics(&self) -> ProgressMetrics {
        progress_metrics(&self.geometry, &self.diagram)
    }
}

/// Runs `rounds` rounds from `seed`.
pub fn build_free(
    diagram: &CoxeterDiagram,
    seed: Geometry,
    rounds: usize,
    caps: Caps,
    check_every_task: bool,
) -> Result<ConstructionState> {
    let mut state = ConstructionState::new(diagram.clone(), seed)?;
    for _ in 0..rounds {
        state.run_round(caps, check_every_task)?;
    }
    Ok(state)
}

pub fn progress_metrics(g: &Geometry, d: &CoxeterDiagram) -> ProgressMetrics {
    let rank = g.rank();
    let mut m = ProgressMetrics {
        vertices: g.len(),
        incidences: g.incidence_count(),
        flags: 0,
        non_completable: 0,
        corank1_flags: 0,
        non_thick_corank1: 0,
        corank2_flags: 0,
        disconnected_residues: 0,
        bond_diameters: Vec::new(),
    };
    let mut per_type = vec![0usize; rank];
    let _ = g.for_each_flag(|flag| {
        m.flags += 1;
        let corank = rank - flag.len();
        if corank == 0 {
            return ControlFlow::Continue(());
        }
        let residue = g.residue_vertices(flag);
        per_type.iter_mut().for_each(|c| *c = 0);
        for &v in &residue {
            per_type[g.type_of(v)] += 1;
        }
        let mask = g.flag_mask(flag);
        if (0..rank).any(|t| mask & (1 << t) == 0 && per_type[t] == 0) {
            m.non_completable += 1;
        }
        if corank == 1 {
            m.corank1_flags += 1;
            if residue.len() < 3 {
                m.non_thick_corank1 += 1;
            }
        } else {
            m.corank2_flags += 1;
            if !g.subgraph(&residue).is_connected() {
                m.disconnected_residues += 1;
            }
        }
        ControlFlow::Continue(())
    });
    let full = g.full_mask();
    for i in 0..rank {
        for j in i + 1..rank {
            let mut sampled = 0;
            let mut best: Option<usize> = None;
            let _ = g.for_each_flag_of_type(full & !(1 << i) & !(1 << j), |flag| {
                let view = g.residue_rank2(flag, i, j);
                for a in 0..view.graph().len() {
                    let far = view.graph().bfs(a).into_iter().flatten().max();
                    best = best.max(far);
                }
                sampled += 1;
                if sampled == DIAMETER_SAMPLES {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            });
            m.bond_diameters.push(BondDiameter {
                types: [d.types()[i].clone(), d.types()[j].clone()],
                sampled,
                max_finite_diameter: best,
            });
        }
    }
    m
}
