//! Finite incidence geometries: flags, residues, rank-2 restrictions and
//! the verifier for geometries of type M.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use crate::diagram::{Bond, CoxeterDiagram};
use crate::error::{Error, Result};
use crate::graph::{Graph, Length};
use crate::verdict::{Verdict, Witness};

pub type VertexId = usize;

/// A geometry over an ordered type set. Vertex ids are dense and follow
/// creation order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Geometry {
    types: Vec<String>,
    vertex_types: Vec<usize>,
    adjacency: Vec<BTreeSet<VertexId>>,
}

/// Set of pairwise incident vertices, stored sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Flag(Vec<VertexId>);

impl Flag {
    pub fn new(mut ids: Vec<VertexId>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        Self(ids)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn with(&self, v: VertexId) -> Self {
        let mut ids = self.0.clone();
        ids.push(v);
        Self::new(ids)
    }
}

impl From<&[VertexId]> for Flag {
    fn from(ids: &[VertexId]) -> Self {
        Self::new(ids.to_vec())
    }
}

/// A residue together with the map from its local ids to ids of the parent
/// geometry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Residue {
    pub geometry: Geometry,
    pub embedding: Vec<VertexId>,
}

/// Bipartite view on the vertices of two types.
#[derive(Debug, Clone)]
pub struct Rank2View {
    types: [usize; 2],
    labels: [String; 2],
    vertices: Vec<VertexId>,
    right: Vec<bool>,
    graph: Graph,
}

/// The clause of the generalized polygon definition a view violates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NgonDefect {
    Thin { vertex: VertexId, degree: usize },
    Girth { girth: Length, cycle: Vec<VertexId> },
    Diameter(Length),
    Disconnected,
}

impl Geometry {
    pub fn new(types: Vec<String>) -> Self {
        Self {
            types,
            vertex_types: Vec::new(),
            adjacency: Vec::new(),
        }
    }

    pub fn over(diagram: &CoxeterDiagram) -> Self {
        Self::new(diagram.types().to_vec())
    }

    pub fn types(&self) -> &[String] {
        &self.types
    }

    pub fn rank(&self) -> usize {
        self.types.len()
    }

    pub fn len(&self) -> usize {
        self.vertex_types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertex_types.is_empty()
    }

    pub fn type_index(&self, label: &str) -> Result<usize> {
        self.types
            .iter()
            .position(|t| t == label)
            .ok_or_else(|| Error::UnknownType(label.to_string()))
    }

    pub fn add_vertex(&mut self, ty: usize) -> VertexId {
        assert!(ty < self.rank(), "type index {ty} out of range");
        self.vertex_types.push(ty);
        self.adjacency.push(BTreeSet::new());
        self.len() - 1
    }

    pub fn add_incidence(&mut self, a: VertexId, b: VertexId) -> Result<()> {
        if a >= self.len() || b >= self.len() {
            return Err(Error::Geometry(format!(
                "incidence ({a}, {b}) names a missing vertex"
            )));
        }
        if self.vertex_types[a] == self.vertex_types[b] {
            return Err(Error::Geometry(format!(
                "vertices {a} and {b} share type `{}` and cannot be incident",
                self.types[self.vertex_types[a]]
            )));
        }
        self.adjacency[a].insert(b);
        self.adjacency[b].insert(a);
        Ok(())
    }

    pub fn type_of(&self, v: VertexId) -> usize {
        self.vertex_types[v]
    }

    pub fn type_label(&self, v: VertexId) -> &str {
        &self.types[self.vertex_types[v]]
    }

    pub fn incident(&self, a: VertexId, b: VertexId) -> bool {
        self.adjacency[a].contains(&b)
    }

    pub fn neighbors(&self, v: VertexId) -> &BTreeSet<VertexId> {
        &self.adjacency[v]
    }

    pub fn vertices_of_type(&self, ty: usize) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.len()).filter(move |&v| self.vertex_types[v] == ty)
    }

    /// Every incident pair `(a, b)` with `a < b`, lexicographically.
    pub fn incidences(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, n)| n.range(a + 1..).map(move |&b| (a, b)))
    }

    pub fn incidence_count(&self) -> usize {
        self.adjacency.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn check_flag(&self, flag: &Flag) -> Result<()> {
        let ids = flag.ids();
        for &v in ids {
            if v >= self.len() {
                return Err(Error::Geometry(format!("vertex {v} does not exist")));
            }
        }
        for (k, &a) in ids.iter().enumerate() {
            for &b in &ids[k + 1..] {
                if !self.incident(a, b) {
                    return Err(Error::NotAFlag(a, b));
                }
            }
        }
        Ok(())
    }

    pub fn flag_mask(&self, flag: &[VertexId]) -> u64 {
        flag.iter().fold(0, |m, &v| m | 1 << self.vertex_types[v])
    }

    pub fn full_mask(&self) -> u64 {
        if self.rank() == 64 {
            u64::MAX
        } else {
            (1u64 << self.rank()) - 1
        }
    }

    /// Vertices outside `flag` incident with every member, ascending.
    /// Assumes `flag` is a flag.
    pub fn residue_vertices(&self, flag: &[VertexId]) -> Vec<VertexId> {
        match flag.split_first() {
            None => (0..self.len()).collect(),
            Some((&first, rest)) => {
                let mut rest = rest.to_vec();
                rest.sort_by_key(|&v| self.adjacency[v].len());
                self.adjacency[first]
                    .iter()
                    .copied()
                    .filter(|&w| rest.iter().all(|&v| self.adjacency[v].contains(&w)))
                    .collect()
            }
        }
    }

    pub fn residue(&self, flag: &Flag) -> Result<Residue> {
        self.check_flag(flag)?;
        let mask = self.flag_mask(flag.ids());
        let kept: Vec<usize> = (0..self.rank()).filter(|t| mask & (1 << t) == 0).collect();
        let mut local_type = vec![usize::MAX; self.rank()];
        for (k, &t) in kept.iter().enumerate() {
            local_type[t] = k;
        }
        let embedding = self.residue_vertices(flag.ids());
        let mut geometry = Geometry::new(kept.iter().map(|&t| self.types[t].clone()).collect());
        for &v in &embedding {
            geometry.add_vertex(local_type[self.vertex_types[v]]);
        }
        self.copy_induced(&embedding, &mut geometry);
        Ok(Residue {
            geometry,
            embedding,
        })
    }

    /// Induced sub-geometry on `vertices` (ascending), same type set.
    pub fn induced(&self, vertices: &[VertexId]) -> Geometry {
        let mut geometry = Geometry::new(self.types.clone());
        for &v in vertices {
            geometry.add_vertex(self.vertex_types[v]);
        }
        self.copy_induced(vertices, &mut geometry);
        geometry
    }

    /// Induced sub-geometry on the first `n` vertices: the state of a
    /// geometry right after its `n`-th vertex was created, since incidences
    /// are only ever added towards new vertices.
    pub fn prefix(&self, n: usize) -> Geometry {
        let ids: Vec<VertexId> = (0..n.min(self.len())).collect();
        self.induced(&ids)
    }

    fn copy_induced(&self, vertices: &[VertexId], into: &mut Geometry) {
        let mut local = vec![usize::MAX; self.len()];
        for (k, &v) in vertices.iter().enumerate() {
            local[v] = k;
        }
        for (k, &v) in vertices.iter().enumerate() {
            for &w in self.adjacency[v].range(v + 1..) {
                if local[w] != usize::MAX {
                    into.adjacency[k].insert(local[w]);
                    into.adjacency[local[w]].insert(k);
                }
            }
        }
    }

    /// Incidence graph on a vertex subset, in local indices.
    pub fn subgraph(&self, vertices: &[VertexId]) -> Graph {
        let mut local = vec![usize::MAX; self.len()];
        for (k, &v) in vertices.iter().enumerate() {
            local[v] = k;
        }
        let edges = vertices.iter().enumerate().flat_map(|(k, &v)| {
            let local = &local;
            self.adjacency[v]
                .range(v + 1..)
                .filter(move |&&w| local[w] != usize::MAX)
                .map(move |&w| (k, local[w]))
        });
        Graph::from_edges(vertices.len(), edges.collect::<Vec<_>>())
    }

    pub fn rank2_restriction(&self, i: &str, j: &str) -> Result<Rank2View> {
        let (a, b) = (self.type_index(i)?, self.type_index(j)?);
        if a == b {
            return Err(Error::pre("rank 2 restriction needs two distinct types"));
        }
        Ok(self.rank2(a, b))
    }

    pub fn rank2(&self, i: usize, j: usize) -> Rank2View {
        Rank2View::from_vertices(self, 0..self.len(), i, j)
    }

    /// Rank-2 restriction of the residue of `flag` to types `i`, `j`.
    pub fn residue_rank2(&self, flag: &[VertexId], i: usize, j: usize) -> Rank2View {
        Rank2View::from_vertices(self, self.residue_vertices(flag), i, j)
    }

    /// Visits every flag whose type set is exactly `mask`. Flags are
    /// produced in backtracking order over types ascending; members are
    /// handed over sorted by id.
    pub fn for_each_flag_of_type(
        &self,
        mask: u64,
        mut visit: impl FnMut(&[VertexId]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let types: Vec<usize> = (0..self.rank()).filter(|t| mask & (1 << t) != 0).collect();
        let mut chosen = Vec::with_capacity(types.len());
        let mut sorted = Vec::with_capacity(types.len());
        let initial: Vec<VertexId> = (0..self.len()).collect();
        self.typed_rec(&types, &initial, &mut chosen, &mut sorted, &mut visit)
    }

    fn typed_rec(
        &self,
        types: &[usize],
        candidates: &[VertexId],
        chosen: &mut Vec<VertexId>,
        sorted: &mut Vec<VertexId>,
        visit: &mut impl FnMut(&[VertexId]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let Some((&t, rest)) = types.split_first() else {
            sorted.clear();
            sorted.extend_from_slice(chosen);
            sorted.sort_unstable();
            return visit(sorted);
        };
        for &v in candidates.iter().filter(|&&v| self.vertex_types[v] == t) {
            let next: Vec<VertexId> = if rest.is_empty() {
                Vec::new()
            } else {
                candidates
                    .iter()
                    .copied()
                    .filter(|&w| self.adjacency[v].contains(&w))
                    .collect()
            };
            chosen.push(v);
            let flow = self.typed_rec(rest, &next, chosen, sorted, visit);
            chosen.pop();
            flow?;
        }
        ControlFlow::Continue(())
    }

    pub fn flags_of_type(&self, mask: u64) -> Vec<Flag> {
        let mut out = Vec::new();
        let _ = self.for_each_flag_of_type(mask, |f| {
            out.push(Flag(f.to_vec()));
            ControlFlow::Continue(())
        });
        out.sort();
        out
    }

    /// Visits every flag of exactly `rank` members in lexicographic order of
    /// their sorted ids.
    pub fn for_each_flag_of_rank(
        &self,
        rank: usize,
        mut visit: impl FnMut(&[VertexId]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let initial: Vec<VertexId> = (0..self.len()).collect();
        let mut chosen = Vec::with_capacity(rank);
        self.lex_rec(Some(rank), &initial, &mut chosen, &mut visit)
    }

    /// Visits every flag, the empty one included, in lexicographic order.
    pub fn for_each_flag(
        &self,
        mut visit: impl FnMut(&[VertexId]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let initial: Vec<VertexId> = (0..self.len()).collect();
        let mut chosen = Vec::new();
        self.lex_rec(None, &initial, &mut chosen, &mut visit)
    }

    fn lex_rec(
        &self,
        rank: Option<usize>,
        candidates: &[VertexId],
        chosen: &mut Vec<VertexId>,
        visit: &mut impl FnMut(&[VertexId]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        match rank {
            Some(r) if chosen.len() == r => return visit(chosen),
            None => visit(chosen)?,
            _ => {}
        }
        for (k, &v) in candidates.iter().enumerate() {
            let next: Vec<VertexId> = candidates[k + 1..]
                .iter()
                .copied()
                .filter(|&w| self.adjacency[v].contains(&w))
                .collect();
            if let Some(r) = rank {
                if chosen.len() + 1 + next.len() < r {
                    continue;
                }
            }
            chosen.push(v);
            let flow = self.lex_rec(rank, &next, chosen, visit);
            chosen.pop();
            flow?;
        }
        ControlFlow::Continue(())
    }

    pub fn is_thick_corank1(&self, flag: &Flag) -> Result<bool> {
        self.check_flag(flag)?;
        let missing = self.full_mask() & !self.flag_mask(flag.ids());
        if missing.count_ones() != 1 || flag.len() + 1 != self.rank() {
            return Err(Error::pre("thickness is defined on flags of corank 1"));
        }
        Ok(self.residue_vertices(flag.ids()).len() >= 3)
    }

    /// First corank-2 flag whose residue is disconnected.
    pub fn residual_connectivity_witness(&self) -> Option<Witness> {
        let full = self.full_mask();
        let mut witness = None;
        for i in 0..self.rank() {
            for j in i + 1..self.rank() {
                let mask = full & !(1 << i) & !(1 << j);
                let _ = self.for_each_flag_of_type(mask, |flag| {
                    let residue = self.residue_vertices(flag);
                    let (components, _) = self.subgraph(&residue).components();
                    if components > 1 {
                        witness = Some(Witness::Connectivity {
                            flag: flag.to_vec(),
                            components,
                        });
                        return ControlFlow::Break(());
                    }
                    ControlFlow::Continue(())
                });
                if witness.is_some() {
                    return witness;
                }
            }
        }
        None
    }

    pub fn is_residually_connected(&self) -> bool {
        self.residual_connectivity_witness().is_none()
    }

    /// First corank-1 flag with fewer than three completions.
    pub fn thickness_witness(&self) -> Option<Witness> {
        let full = self.full_mask();
        let mut witness = None;
        for t in 0..self.rank() {
            let _ = self.for_each_flag_of_type(full & !(1 << t), |flag| {
                let completions = self.residue_vertices(flag).len();
                if completions < 3 {
                    witness = Some(Witness::Thickness {
                        flag: flag.to_vec(),
                        missing_type: self.types[t].clone(),
                        completions,
                    });
                    return ControlFlow::Break(());
                }
                ControlFlow::Continue(())
            });
            if witness.is_some() {
                return witness;
            }
        }
        None
    }

    /// Full check of the type-M axioms: thickness, residual connectedness
    /// and generalized `m_{i,j}`-gon residues for every flag of cotype
    /// `{i, j}`.
    pub fn is_geometry_of_type_m(&self, diagram: &CoxeterDiagram) -> Result<Verdict> {
        self.require_types(diagram)?;
        const NAME: &str = "typeM";
        if let Some(w) = self.thickness_witness() {
            return Ok(Verdict::fail(NAME, w));
        }
        if let Some(w) = self.residual_connectivity_witness() {
            return Ok(Verdict::fail(NAME, w));
        }
        let full = self.full_mask();
        for i in 0..self.rank() {
            for j in i + 1..self.rank() {
                let m = diagram.bond(i, j);
                let mask = full & !(1 << i) & !(1 << j);
                let mut witness = None;
                let _ = self.for_each_flag_of_type(mask, |flag| {
                    let view = self.residue_rank2(flag, i, j);
                    if let Some(defect) = view.ngon_defect(m) {
                        witness = Some(view.defect_witness(flag, defect));
                        return ControlFlow::Break(());
                    }
                    ControlFlow::Continue(())
                });
                if let Some(w) = witness {
                    return Ok(Verdict::fail(NAME, w));
                }
            }
        }
        Ok(Verdict::pass(NAME))
    }

    pub(crate) fn require_types(&self, diagram: &CoxeterDiagram) -> Result<()> {
        if self.types != diagram.types() {
            return Err(Error::pre(format!(
                "geometry types {:?} do not match diagram types {:?}",
                self.types,
                diagram.types()
            )));
        }
        Ok(())
    }

    /// Adds `other` as a disjoint copy; returns the id offset.
    pub fn disjoint_union(&mut self, other: &Geometry) -> Result<usize> {
        if self.types != other.types {
            return Err(Error::pre("disjoint union needs equal type sets"));
        }
        let offset = self.len();
        for v in 0..other.len() {
            self.add_vertex(other.vertex_types[v]);
        }
        for (a, b) in other.incidences() {
            self.add_incidence(a + offset, b + offset)?;
        }
        Ok(offset)
    }
}

impl Rank2View {
    pub fn from_vertices(
        g: &Geometry,
        candidates: impl IntoIterator<Item = VertexId>,
        i: usize,
        j: usize,
    ) -> Self {
        let vertices: Vec<VertexId> = candidates
            .into_iter()
            .filter(|&v| g.type_of(v) == i || g.type_of(v) == j)
            .collect();
        let right = vertices.iter().map(|&v| g.type_of(v) == j).collect();
        let graph = g.subgraph(&vertices);
        Self {
            types: [i, j],
            labels: [g.types[i].clone(), g.types[j].clone()],
            vertices,
            right,
            graph,
        }
    }

    pub fn types(&self) -> [usize; 2] {
        self.types
    }

    pub fn labels(&self) -> &[String; 2] {
        &self.labels
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn left(&self) -> Vec<VertexId> {
        self.side(false)
    }

    pub fn right(&self) -> Vec<VertexId> {
        self.side(true)
    }

    fn side(&self, right: bool) -> Vec<VertexId> {
        self.vertices
            .iter()
            .zip(&self.right)
            .filter(|(_, &r)| r == right)
            .map(|(&v, _)| v)
            .collect()
    }

    /// Incident pairs as `(left, right)` global ids, sorted.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::new();
        for a in 0..self.graph.len() {
            for &b in self.graph.neighbors(a) {
                if !self.right[a] && self.right[b] {
                    out.push((self.vertices[a], self.vertices[b]));
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn local(&self, v: VertexId) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    pub fn girth(&self) -> Length {
        self.graph.girth()
    }

    /// A shortest cycle in global ids, canonical least-id rotation.
    pub fn shortest_cycle(&self) -> Option<Vec<VertexId>> {
        // Local indices are monotone in global ids, so the rotation carries over.
        self.graph
            .shortest_cycle()
            .map(|c| c.into_iter().map(|k| self.vertices[k]).collect())
    }

    pub fn distance(&self, a: VertexId, b: VertexId) -> Result<Length> {
        let (la, lb) = match (self.local(a), self.local(b)) {
            (Some(la), Some(lb)) => (la, lb),
            _ => return Err(Error::pre(format!("vertex {a} or {b} is not in the view"))),
        };
        Ok(self.graph.distance(la, lb))
    }

    pub fn diameter(&self) -> Length {
        self.graph.diameter()
    }

    pub fn is_generalized_ngon(&self, n: Bond) -> bool {
        self.ngon_defect(n).is_none()
    }

    pub fn ngon_defect(&self, n: Bond) -> Option<NgonDefect> {
        for k in 0..self.graph.len() {
            if self.graph.degree(k) < 3 {
                return Some(NgonDefect::Thin {
                    vertex: self.vertices[k],
                    degree: self.graph.degree(k),
                });
            }
        }
        match n {
            Bond::Finite(n) => {
                let n = n as usize;
                let cycle = self.shortest_cycle();
                let girth: Length = cycle.as_ref().map(Vec::len).into();
                if girth != Length::Finite(2 * n) {
                    return Some(NgonDefect::Girth {
                        girth,
                        cycle: cycle.unwrap_or_default(),
                    });
                }
                let diameter = self.diameter();
                (diameter != Length::Finite(n)).then_some(NgonDefect::Diameter(diameter))
            }
            Bond::Infinite => {
                if let Some(cycle) = self.shortest_cycle() {
                    return Some(NgonDefect::Girth {
                        girth: Length::Finite(cycle.len()),
                        cycle,
                    });
                }
                (!self.graph.is_connected() || self.graph.is_empty())
                    .then_some(NgonDefect::Disconnected)
            }
        }
    }

    fn defect_witness(&self, flag: &[VertexId], defect: NgonDefect) -> Witness {
        let types = self.labels.clone();
        match defect {
            NgonDefect::Thin { vertex, degree } => {
                let mut f = flag.to_vec();
                f.push(vertex);
                f.sort_unstable();
                let missing = if self.local(vertex).map(|k| self.right[k]) == Some(true) {
                    types[0].clone()
                } else {
                    types[1].clone()
                };
                Witness::Thickness {
                    flag: f,
                    missing_type: missing,
                    completions: degree,
                }
            }
            NgonDefect::Girth { girth, cycle } => Witness::Girth {
                flag: flag.to_vec(),
                types,
                girth,
                cycle,
            },
            NgonDefect::Diameter(diameter) => Witness::Diameter {
                flag: flag.to_vec(),
                types,
                diameter,
            },
            NgonDefect::Disconnected => Witness::Connectivity {
                flag: flag.to_vec(),
                components: self.graph.components().0,
            },
        }
    }

    /// The same view with its sides exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            types: [self.types[1], self.types[0]],
            labels: [self.labels[1].clone(), self.labels[0].clone()],
            vertices: self.vertices.clone(),
            right: self.right.iter().map(|r| !r).collect(),
            graph: self.graph.clone(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct GeometryFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    version: Option<u32>,
    types: Vec<String>,
    vertices: Vec<VertexFile>,
    incidences: Vec<(VertexId, VertexId)>,
}

#[derive(Serialize, Deserialize)]
struct VertexFile {
    id: VertexId,
    #[serde(rename = "type")]
    ty: String,
}

impl Serialize for Geometry {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GeometryFile {
            version: None,
            types: self.types.clone(),
            vertices: (0..self.len())
                .map(|id| VertexFile {
                    id,
                    ty: self.type_label(id).to_string(),
                })
                .collect(),
            incidences: self.incidences().collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Geometry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = GeometryFile::deserialize(d)?;
        Geometry::from_file(file).map_err(de::Error::custom)
    }
}

impl Geometry {
    fn from_file(file: GeometryFile) -> Result<Self> {
        if let Some(v) = file.version {
            if v != crate::io::FORMAT_VERSION {
                return Err(Error::Format(format!("unsupported geometry version {v}")));
            }
        }
        for (k, t) in file.types.iter().enumerate() {
            if file.types[..k].contains(t) {
                return Err(Error::Geometry(format!("duplicate type `{t}`")));
            }
        }
        let mut g = Geometry::new(file.types);
        for (k, v) in file.vertices.iter().enumerate() {
            if v.id != k {
                return Err(Error::Geometry(format!(
                    "vertex ids must be dense and ordered; found {} at position {k}",
                    v.id
                )));
            }
            let ty = g.type_index(&v.ty)?;
            g.add_vertex(ty);
        }
        let mut seen = BTreeSet::new();
        for &(a, b) in &file.incidences {
            if a == b {
                return Err(Error::Geometry(format!(
                    "vertex {a} listed as incident with itself"
                )));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::Geometry(format!(
                    "incidence ({a}, {b}) listed twice"
                )));
            }
            g.add_incidence(a, b)?;
        }
        Ok(g)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("geometry serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GeometryFile = serde_json::from_str(text)?;
        Self::from_file(file)
    }
}
