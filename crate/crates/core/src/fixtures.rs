//! Hand-built geometries used as fixtures by tests, benches and the CLI.

use std::collections::BTreeSet;

use crate::geometry::Geometry;

type Triple = [usize; 3];

/// Lines `{i, i+1, i+3}` mod 7.
pub fn fano_lines() -> Vec<Triple> {
    (0..7)
        .map(|i| {
            let mut l = [i, (i + 1) % 7, (i + 3) % 7];
            l.sort_unstable();
            l
        })
        .collect()
}

/// Point/line flag geometry of the Fano plane: points are ids `0..7`, lines
/// `7..14`. Types are `point` and `line`.
pub fn fano_flag_geometry() -> Geometry {
    let mut g = Geometry::new(vec!["point".into(), "line".into()]);
    for _ in 0..7 {
        g.add_vertex(0);
    }
    for line in fano_lines() {
        let id = g.add_vertex(1);
        for p in line {
            g.add_incidence(p, id).expect("point-line incidence");
        }
    }
    g
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn is_even(p: &[usize]) -> bool {
    let inversions = (0..p.len())
        .flat_map(|i| (i + 1..p.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| p[i] > p[j])
        .count();
    inversions % 2 == 0
}

/// The 15 Fano planes on `{0..7}` in the alternating-group orbit of
/// [`fano_lines`], each as a sorted list of sorted lines, in sorted order.
pub fn fano_orbit() -> Vec<Vec<Triple>> {
    let base = fano_lines();
    let mut perm: Vec<usize> = (0..7).collect();
    let mut planes = BTreeSet::new();
    loop {
        if is_even(&perm) {
            let mut lines: Vec<Triple> = base
                .iter()
                .map(|l| {
                    let mut img = [perm[l[0]], perm[l[1]], perm[l[2]]];
                    img.sort_unstable();
                    img
                })
                .collect();
            lines.sort_unstable();
            planes.insert(lines);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    planes.into_iter().collect()
}

/// The Neumaier geometry over the C3 type set `1, 2, 3`: 7 points (ids
/// `0..7`), all 35 point triples as lines (`7..42`, lexicographic) and 15
/// planes (`42..57`). Every point lies in every plane; a line lies in a
/// plane when it is one of that plane's lines.
pub fn neumaier() -> Geometry {
    let mut g = Geometry::new(vec!["1".into(), "2".into(), "3".into()]);
    for _ in 0..7 {
        g.add_vertex(0);
    }
    let mut triples = Vec::new();
    for a in 0..7 {
        for b in a + 1..7 {
            for c in b + 1..7 {
                triples.push([a, b, c]);
            }
        }
    }
    let line_ids: Vec<usize> = triples
        .iter()
        .map(|t| {
            let id = g.add_vertex(1);
            for &p in t {
                g.add_incidence(p, id).expect("point-line");
            }
            id
        })
        .collect();
    for plane in fano_orbit() {
        let id = g.add_vertex(2);
        for p in 0..7 {
            g.add_incidence(p, id).expect("point-plane");
        }
        for line in plane {
            let k = triples.iter().position(|t| *t == line).unwrap();
            g.add_incidence(line_ids[k], id).expect("line-plane");
        }
    }
    g
}
