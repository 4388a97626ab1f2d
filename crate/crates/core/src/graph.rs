//! Small undirected graphs on dense local indices, and the breadth-first
//! search routines every verifier in the crate is built on.

use std::collections::VecDeque;
use std::fmt;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

/// A path length, girth or diameter that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Length {
    Finite(usize),
    Infinite,
}

impl Length {
    pub fn finite(self) -> Option<usize> {
        match self {
            Length::Finite(v) => Some(v),
            Length::Infinite => None,
        }
    }
}

impl From<Option<usize>> for Length {
    fn from(v: Option<usize>) -> Self {
        v.map_or(Length::Infinite, Length::Finite)
    }
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Length::Finite(v) => write!(f, "{v}"),
            Length::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Length {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Length::Finite(v) => s.serialize_u64(*v as u64),
            Length::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Length {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(s) if s == "inf" => Ok(Length::Infinite),
            serde_json::Value::Number(n) => n
                .as_u64()
                .map(|v| Length::Finite(v as usize))
                .ok_or_else(|| de::Error::custom("length must be a non-negative integer")),
            other => Err(de::Error::custom(format!("bad length {other}"))),
        }
    }
}

/// Adjacency lists over `0..n`. Neighbor lists are kept sorted so that
/// every traversal is deterministic.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Self::new(n);
        for (a, b) in edges {
            g.adj[a].push(b);
            g.adj[b].push(a);
        }
        for list in &mut g.adj {
            list.sort_unstable();
            list.dedup();
        }
        g
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Breadth-first distances from `src`; `None` marks unreachable vertices.
    pub fn bfs(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.len()];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &w in &self.adj[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn distance(&self, a: usize, b: usize) -> Length {
        self.bfs(a)[b].into()
    }

    /// Component label per vertex; labels are numbered by least member.
    pub fn components(&self) -> (usize, Vec<usize>) {
        let mut label = vec![usize::MAX; self.len()];
        let mut count = 0;
        for s in 0..self.len() {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &w in &self.adj[u] {
                    if label[w] == usize::MAX {
                        label[w] = count;
                        stack.push(w);
                    }
                }
            }
            count += 1;
        }
        (count, label)
    }

    /// The empty graph counts as connected.
    pub fn is_connected(&self) -> bool {
        self.components().0 <= 1
    }

    /// Largest eccentricity; infinite when disconnected, zero when empty.
    pub fn diameter(&self) -> Length {
        let mut best = 0;
        for s in 0..self.len() {
            for d in self.bfs(s) {
                match d {
                    Some(d) => best = best.max(d),
                    None => return Length::Infinite,
                }
            }
        }
        Length::Finite(best)
    }

    pub fn girth(&self) -> Length {
        self.shortest_cycle().map(|c| c.len()).into()
    }

    /// A shortest cycle, rotated to start at its least vertex and oriented
    /// so the second entry is the smaller of that vertex's two cycle
    /// neighbors. `None` for forests.
    ///
    /// Runs a BFS from every vertex and closes walks on non-tree edges. The
    /// global minimum is attained at a root lying on a shortest cycle, where
    /// the two tree paths are internally disjoint.
    pub fn shortest_cycle(&self) -> Option<Vec<usize>> {
        let n = self.len();
        let mut best: Option<Vec<usize>> = None;
        let mut dist = vec![usize::MAX; n];
        let mut parent = vec![usize::MAX; n];
        for root in 0..n {
            dist.iter_mut().for_each(|d| *d = usize::MAX);
            dist[root] = 0;
            parent[root] = usize::MAX;
            let mut queue = VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                let bound = best.as_ref().map_or(usize::MAX, Vec::len);
                if 2 * dist[u] + 1 >= bound {
                    break;
                }
                for &w in &self.adj[u] {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        parent[w] = u;
                        queue.push_back(w);
                    } else if w != parent[u] && dist[w] >= dist[u] {
                        let len = dist[u] + dist[w] + 1;
                        if len < best.as_ref().map_or(usize::MAX, Vec::len) {
                            let mut left = vec![u];
                            while *left.last().unwrap() != root {
                                left.push(parent[*left.last().unwrap()]);
                            }
                            let mut right = vec![w];
                            while *right.last().unwrap() != root {
                                right.push(parent[*right.last().unwrap()]);
                            }
                            left.reverse();
                            right.pop();
                            left.extend(right);
                            best = Some(left);
                        }
                    }
                }
            }
        }
        best.map(canonical_rotation)
    }

    /// Counts shortest paths from `src` (saturating at 2) and returns the
    /// distance and count arrays together with one BFS parent per vertex.
    pub fn shortest_path_counts(&self, src: usize) -> (Vec<Option<usize>>, Vec<u8>, Vec<usize>) {
        let n = self.len();
        let mut dist = vec![None; n];
        let mut count = vec![0u8; n];
        let mut parent = vec![usize::MAX; n];
        dist[src] = Some(0);
        count[src] = 1;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &w in &self.adj[u] {
                match dist[w] {
                    None => {
                        dist[w] = Some(du + 1);
                        count[w] = count[u];
                        parent[w] = u;
                        queue.push_back(w);
                    }
                    Some(dw) if dw == du + 1 => {
                        count[w] = count[w].saturating_add(count[u]).min(2);
                    }
                    _ => {}
                }
            }
        }
        (dist, count, parent)
    }
}

/// Rotates a cycle to its least vertex and picks the direction whose second
/// entry is smaller.
pub fn canonical_rotation(cycle: Vec<usize>) -> Vec<usize> {
    let n = cycle.len();
    if n == 0 {
        return cycle;
    }
    let start = (0..n).min_by_key(|&k| cycle[k]).unwrap();
    let forward: Vec<usize> = (0..n).map(|k| cycle[(start + k) % n]).collect();
    let backward: Vec<usize> = (0..n).map(|k| cycle[(start + n - k) % n]).collect();
    if n > 1 && backward[1] < forward[1] {
        backward
    } else {
        forward
    }
}
