//! Coxeter diagrams over a finite, ordered type set.
//!
//! Types are addressed two ways: by label (the strings that appear in the
//! JSON formats) and by index into [`CoxeterDiagram::types`]. Everything past
//! the parsing layer works with indices.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// A bond label `m_{i,j}`: an integer `>= 2` or infinity.
///
/// `Infinite` orders above every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bond {
    Finite(u32),
    Infinite,
}

impl Bond {
    pub fn is_adjacent(self) -> bool {
        self >= Bond::Finite(3)
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            Bond::Finite(m) => Some(m),
            Bond::Infinite => None,
        }
    }
}

impl fmt::Display for Bond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bond::Finite(m) => write!(f, "{m}"),
            Bond::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Bond {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Bond::Finite(m) => s.serialize_u32(*m),
            Bond::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Bond {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct BondVisitor;
        impl<'de> Visitor<'de> for BondVisitor {
            type Value = Bond;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a positive integer or \"inf\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Bond, E> {
                u32::try_from(v).map(Bond::Finite).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Bond, E> {
                u32::try_from(v).map(Bond::Finite).map_err(E::custom)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Bond, E> {
                match v {
                    "inf" | "infinity" => Ok(Bond::Infinite),
                    other => Err(E::custom(format!("unknown bond label `{other}`"))),
                }
            }
        }
        d.deserialize_any(BondVisitor)
    }
}

/// Symmetric Coxeter matrix over an ordered set of type labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoxeterDiagram {
    types: Vec<String>,
    // Row-major |I| x |I|; the diagonal is never read.
    bonds: Vec<Bond>,
}

/// Result of [`CoxeterDiagram::cn_shape`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnShape {
    pub n: usize,
    pub m: u32,
    /// Type indices in chain order, the `m`-bond between the last two.
    pub order: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct DiagramFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    version: Option<u32>,
    nodes: Vec<String>,
    edges: Vec<EdgeFile>,
}

#[derive(Serialize, Deserialize)]
struct EdgeFile {
    i: String,
    j: String,
    m: Bond,
}

impl CoxeterDiagram {
    /// Builds a diagram from labels and the bonds that differ from 2.
    pub fn new(types: Vec<String>, edges: &[(usize, usize, Bond)]) -> Result<Self> {
        if types.is_empty() {
            return Err(Error::Diagram("type set is empty".into()));
        }
        for (a, label) in types.iter().enumerate() {
            if types[..a].contains(label) {
                return Err(Error::Diagram(format!("duplicate node `{label}`")));
            }
        }
        let r = types.len();
        let mut bonds = vec![Bond::Finite(2); r * r];
        for &(i, j, m) in edges {
            if i >= r || j >= r || i == j {
                return Err(Error::Diagram(format!("bad edge ({i}, {j})")));
            }
            if m < Bond::Finite(2) {
                return Err(Error::Diagram(format!("bond {m} below 2")));
            }
            bonds[i * r + j] = m;
            bonds[j * r + i] = m;
        }
        Ok(Self { types, bonds })
    }

    /// Linear chain `1 - 2 - ... - k` with the given consecutive bonds.
    pub fn linear(chain: &[u32]) -> Self {
        let types = (1..=chain.len() + 1).map(|t| t.to_string()).collect();
        let edges: Vec<_> = chain
            .iter()
            .enumerate()
            .map(|(k, &m)| (k, k + 1, Bond::Finite(m)))
            .collect();
        Self::new(types, &edges).expect("chain diagrams are valid")
    }

    pub fn a(n: usize) -> Self {
        Self::linear(&vec![3; n - 1])
    }

    pub fn c(n: usize) -> Self {
        let mut chain = vec![3; n - 1];
        chain[n - 2] = 4;
        Self::linear(&chain)
    }

    pub fn h(n: usize) -> Self {
        let mut chain = vec![3; n - 1];
        chain[n - 2] = 5;
        Self::linear(&chain)
    }

    pub fn f4() -> Self {
        Self::linear(&[3, 4, 3])
    }

    pub fn i2(m: Bond) -> Self {
        Self::new(vec!["1".into(), "2".into()], &[(0, 1, m)]).expect("valid rank 2 diagram")
    }

    /// Looks up a diagram by conventional name: `A3`, `C4`, `H3`, `F4`, `I2(5)`, `I2(inf)`.
    pub fn named(name: &str) -> Option<Self> {
        let name = name.trim();
        if let Some(rest) = name.strip_prefix("I2(").and_then(|r| r.strip_suffix(')')) {
            let m = if rest == "inf" {
                Bond::Infinite
            } else {
                Bond::Finite(rest.parse().ok().filter(|&m| m >= 2)?)
            };
            return Some(Self::i2(m));
        }
        let (family, rank) = name.split_at(1);
        let rank: usize = rank.parse().ok()?;
        match (family, rank) {
            ("A", n) if n >= 1 => Some(if n == 1 {
                Self::new(vec!["1".into()], &[]).ok()?
            } else {
                Self::a(n)
            }),
            ("B" | "C", n) if n >= 2 => Some(Self::c(n)),
            ("H", 3 | 4) => Some(Self::h(rank)),
            ("F", 4) => Some(Self::f4()),
            _ => None,
        }
    }

    pub fn types(&self) -> &[String] {
        &self.types
    }

    pub fn rank(&self) -> usize {
        self.types.len()
    }

    pub fn type_index(&self, label: &str) -> Result<usize> {
        self.types
            .iter()
            .position(|t| t == label)
            .ok_or_else(|| Error::UnknownType(label.to_string()))
    }

    /// `m_{i,j}` by index; `i != j`.
    pub fn bond(&self, i: usize, j: usize) -> Bond {
        debug_assert_ne!(i, j);
        self.bonds[i * self.rank() + j]
    }

    /// Index-based adjacency; a type is never adjacent to itself.
    pub fn is_adjacent(&self, i: usize, j: usize) -> bool {
        i != j && self.bond(i, j).is_adjacent()
    }

    /// Label-based adjacency query.
    pub fn adjacent(&self, i: &str, j: &str) -> Result<bool> {
        let (a, b) = (self.type_index(i)?, self.type_index(j)?);
        if a == b {
            return Err(Error::pre(format!("adjacency of `{i}` with itself")));
        }
        Ok(self.is_adjacent(a, b))
    }

    /// Bitmask of types distinct from `t` and not adjacent to it: the
    /// types whose vertices Property (F) forces to be incident with a
    /// type-`t` vertex.
    pub fn forced_mask(&self, t: usize) -> u64 {
        (0..self.rank())
            .filter(|&u| u != t && !self.is_adjacent(t, u))
            .fold(0, |acc, u| acc | 1 << u)
    }

    /// Types outside `{i, j}` adjacent to `i` or `j`, as a bitmask.
    pub fn neighborhood_mask(&self, i: usize, j: usize) -> u64 {
        (0..self.rank())
            .filter(|&k| k != i && k != j && (self.is_adjacent(i, k) || self.is_adjacent(j, k)))
            .fold(0, |acc, k| acc | 1 << k)
    }

    pub fn full_mask(&self) -> u64 {
        if self.rank() == 64 {
            u64::MAX
        } else {
            (1u64 << self.rank()) - 1
        }
    }

    /// Adjacent pairs `(i, j)` with `i < j`, in index order.
    pub fn adjacent_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let r = self.rank();
        (0..r)
            .flat_map(move |i| (i + 1..r).map(move |j| (i, j)))
            .filter(|&(i, j)| self.is_adjacent(i, j))
    }

    pub fn has_subdiagram_a3(&self) -> bool {
        let r = self.rank();
        for j in 0..r {
            for i in 0..r {
                for k in i + 1..r {
                    if i != j
                        && k != j
                        && self.bond(i, j) == Bond::Finite(3)
                        && self.bond(j, k) == Bond::Finite(3)
                        && self.bond(i, k) == Bond::Finite(2)
                    {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Recognises the linear chain `3, 3, ..., 3, m` with `4 <= m < inf`
    /// on at least three nodes.
    pub fn cn_shape(&self) -> Option<CnShape> {
        let r = self.rank();
        if r < 3 {
            return None;
        }
        let neighbors: Vec<Vec<usize>> = (0..r)
            .map(|i| (0..r).filter(|&j| self.is_adjacent(i, j)).collect())
            .collect();
        if neighbors.iter().any(|n| n.is_empty() || n.len() > 2) {
            return None;
        }
        let ends: Vec<usize> = (0..r).filter(|&i| neighbors[i].len() == 1).collect();
        if ends.len() != 2 {
            return None;
        }
        // Walk from the end whose bond is 3; a cycle never reaches r nodes.
        let start = *ends
            .iter()
            .find(|&&e| self.bond(e, neighbors[e][0]) == Bond::Finite(3))?;
        let mut order = vec![start];
        let mut prev = usize::MAX;
        let mut cur = start;
        while let Some(&next) = neighbors[cur].iter().find(|&&x| x != prev) {
            if order.contains(&next) {
                return None;
            }
            order.push(next);
            prev = cur;
            cur = next;
        }
        if order.len() != r {
            return None;
        }
        let chain: Vec<Bond> = order.windows(2).map(|w| self.bond(w[0], w[1])).collect();
        let (last, rest) = chain.split_last()?;
        if rest.iter().any(|&b| b != Bond::Finite(3)) {
            return None;
        }
        match *last {
            Bond::Finite(m) if m >= 4 => Some(CnShape { n: r, m, order }),
            _ => None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: DiagramFile = serde_json::from_str(text)?;
        if let Some(v) = file.version {
            if v != crate::io::FORMAT_VERSION {
                return Err(Error::Format(format!("unsupported diagram version {v}")));
            }
        }
        let mut types: Vec<String> = Vec::new();
        for node in &file.nodes {
            if types.contains(node) {
                return Err(Error::Diagram(format!("duplicate node label `{node}`")));
            }
            types.push(node.clone());
        }
        if types.is_empty() {
            return Err(Error::Diagram("no nodes".into()));
        }
        let index = |label: &str| {
            types
                .iter()
                .position(|t| t == label)
                .ok_or_else(|| Error::Diagram(format!("edge references unknown node `{label}`")))
        };
        let mut seen: BTreeMap<(usize, usize), Bond> = BTreeMap::new();
        for e in &file.edges {
            let (i, j) = (index(&e.i)?, index(&e.j)?);
            if i == j {
                return Err(Error::Diagram(format!("loop edge on `{}`", e.i)));
            }
            if e.m < Bond::Finite(3) {
                return Err(Error::Diagram(format!(
                    "edge ({}, {}) lists m = {}; only m >= 3 may be listed",
                    e.i, e.j, e.m
                )));
            }
            let key = (i.min(j), i.max(j));
            match seen.get(&key) {
                Some(&prev) if prev != e.m => {
                    return Err(Error::Diagram(format!(
                        "conflicting bonds {prev} and {} for ({}, {})",
                        e.m, e.i, e.j
                    )))
                }
                _ => {
                    seen.insert(key, e.m);
                }
            }
        }
        let edges: Vec<_> = seen.into_iter().map(|((i, j), m)| (i, j, m)).collect();
        Self::new(types, &edges)
    }

    pub fn to_json(&self) -> String {
        let r = self.rank();
        let mut edges = Vec::new();
        for i in 0..r {
            for j in i + 1..r {
                let m = self.bond(i, j);
                if m != Bond::Finite(2) {
                    edges.push(EdgeFile {
                        i: self.types[i].clone(),
                        j: self.types[j].clone(),
                        m,
                    });
                }
            }
        }
        let file = DiagramFile {
            version: None,
            nodes: self.types.clone(),
            edges,
        };
        serde_json::to_string(&file).expect("diagram serializes")
    }
}

impl Serialize for CoxeterDiagram {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let value: serde_json::Value =
            serde_json::from_str(&self.to_json()).map_err(serde::ser::Error::custom)?;
        value.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CoxeterDiagram {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        CoxeterDiagram::parse(&value.to_string()).map_err(de::Error::custom)
    }
}
