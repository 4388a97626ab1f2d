//! The stage invariants of the free construction: flatness (F), partial
//! polygons (P) and absence of digons (D).

use std::ops::ControlFlow;

use crate::diagram::{Bond, CoxeterDiagram};
use crate::error::Result;
use crate::geometry::{Geometry, VertexId};
use crate::graph::Length;
use crate::verdict::{Verdict, Witness};

/// Every pair of vertices of distinct, non-adjacent types is incident.
pub fn check_f(g: &Geometry, d: &CoxeterDiagram) -> Result<Verdict> {
    g.require_types(d)?;
    Ok(Verdict::from_witness("F", f_witness(g, d)))
}

fn f_witness(g: &Geometry, d: &CoxeterDiagram) -> Option<Witness> {
    let forced: Vec<u64> = (0..d.rank()).map(|t| d.forced_mask(t)).collect();
    for a in 0..g.len() {
        let mask = forced[g.type_of(a)];
        if mask == 0 {
            continue;
        }
        for b in a + 1..g.len() {
            if mask & (1 << g.type_of(b)) != 0 && !g.incident(a, b) {
                return Some(Witness::NonIncidentPair { a, b });
            }
        }
    }
    None
}

/// Smallest girth the `(i, j)` restriction of a minimal residue may have:
/// no `t`-gons for `t < m` means girth at least `2m`; for `m = inf`, none.
pub fn required_girth(m: Bond) -> Length {
    match m {
        Bond::Finite(m) => Length::Finite(2 * m as usize),
        Bond::Infinite => Length::Infinite,
    }
}

/// For each adjacent pair `(i, j)` and each flag whose type set is exactly
/// the types adjacent to `i` or `j`, the `(i, j)` restriction of its
/// residue has no `t`-gons for `t < m_{i,j}`.
pub fn check_p(g: &Geometry, d: &CoxeterDiagram) -> Result<Verdict> {
    g.require_types(d)?;
    Ok(Verdict::from_witness("P", p_witness(g, d)))
}

fn p_witness(g: &Geometry, d: &CoxeterDiagram) -> Option<Witness> {
    for (i, j) in d.adjacent_pairs() {
        if let Some(w) = p_witness_for_pair(g, d, i, j) {
            return Some(w);
        }
    }
    None
}

pub(crate) fn p_witness_for_pair(
    g: &Geometry,
    d: &CoxeterDiagram,
    i: usize,
    j: usize,
) -> Option<Witness> {
    let need = required_girth(d.bond(i, j));
    let mut witness = None;
    let _ = g.for_each_flag_of_type(d.neighborhood_mask(i, j), |flag| {
        if let Some(w) = short_cycle(g, flag, i, j, need) {
            witness = Some(w);
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    });
    witness
}

/// A cycle shorter than `need` in the `(i, j)` restriction of the residue
/// of `flag`.
pub(crate) fn short_cycle(
    g: &Geometry,
    flag: &[VertexId],
    i: usize,
    j: usize,
    need: Length,
) -> Option<Witness> {
    let view = g.residue_rank2(flag, i, j);
    let cycle = view.shortest_cycle()?;
    let girth = Length::Finite(cycle.len());
    (girth < need).then(|| Witness::Girth {
        flag: flag.to_vec(),
        types: view.labels().clone(),
        girth,
        cycle,
    })
}

/// For every pair with `m_{i,j} >= 4` the whole `(i, j)` restriction has
/// no 4-cycles.
pub fn check_d(g: &Geometry, d: &CoxeterDiagram) -> Result<Verdict> {
    g.require_types(d)?;
    Ok(Verdict::from_witness("D", d_witness(g, d)))
}

fn d_witness(g: &Geometry, d: &CoxeterDiagram) -> Option<Witness> {
    for i in 0..d.rank() {
        for j in i + 1..d.rank() {
            if d.bond(i, j) >= Bond::Finite(4) {
                if let Some(w) = short_cycle(g, &[], i, j, Length::Finite(6)) {
                    return Some(w);
                }
            }
        }
    }
    None
}

/// All three stage invariants, in the order F, P, D.
pub fn check_fpd(g: &Geometry, d: &CoxeterDiagram) -> Result<Vec<Verdict>> {
    Ok(vec![check_f(g, d)?, check_p(g, d)?, check_d(g, d)?])
}

/// Whether `(F)`, `(P)` and `(D)` all pass; first failure otherwise.
pub fn fpd_failure(g: &Geometry, d: &CoxeterDiagram) -> Result<Option<Verdict>> {
    Ok(check_fpd(g, d)?.into_iter().find(|v| !v.is_pass()))
}
