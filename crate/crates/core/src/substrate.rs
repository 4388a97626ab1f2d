//! Proper nonzero subspaces of `Q^n` in exact arithmetic, and the lazy,
//! height-ordered enumeration that supplies fresh ones on demand.
//!
//! A subspace is stored in reduced row echelon form with every row scaled
//! to a primitive integer vector with positive pivot. That form is unique,
//! so equality, hashing and ordering of [`Subspace`] values are equality,
//! hashing and ordering of the underlying subspaces.

use std::cmp::Reverse;
use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subspace {
    rows: Vec<Vec<i64>>,
    /// Primitive integer basis of the annihilator, derived from `rows`.
    normals: Vec<Vec<i64>>,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "span{:?}", self.rows)
    }
}

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Reduced row echelon form, zero rows dropped, with pivot columns.
fn rref(mut m: Vec<Vec<BigRational>>, n: usize) -> (Vec<Vec<BigRational>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..m.len()).find(|&k| !m[k][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in &mut m[r] {
            *x = &*x * &inv;
        }
        for k in 0..m.len() {
            if k != r && !m[k][c].is_zero() {
                let f = m[k][c].clone();
                let pivot = m[r].clone();
                for (x, p) in m[k].iter_mut().zip(&pivot) {
                    *x -= &f * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    (m, pivots)
}

/// Scales a rational vector to a primitive integer vector, keeping sign.
fn primitive(v: &[BigRational]) -> Result<Vec<i64>> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &lcm).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    ints.iter()
        .map(|x| {
            (x / &g)
                .to_i64()
                .ok_or_else(|| Error::Subspace("coordinate exceeds 64 bits".into()))
        })
        .collect()
}

/// Basis of `{v : row . v = 0 for all rows}` from an RREF matrix.
fn null_space(rref: &[Vec<BigRational>], pivots: &[usize], n: usize) -> Vec<Vec<BigRational>> {
    (0..n)
        .filter(|c| !pivots.contains(c))
        .map(|f| {
            let mut v = vec![BigRational::zero(); n];
            v[f] = BigRational::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -rref[r][f].clone();
            }
            v
        })
        .collect()
}

fn dot(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(&x, &y)| x as i128 * y as i128).sum()
}

impl Subspace {
    /// The canonical form of the span of `rows`.
    pub fn canonicalize(rows: &[Vec<BigRational>]) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Subspace("rows of different lengths".into()));
        }
        let (m, pivots) = rref(rows.to_vec(), n);
        if m.is_empty() {
            return Err(Error::Subspace("zero span".into()));
        }
        if m.len() == n {
            return Err(Error::Subspace("full span".into()));
        }
        let normals = null_space(&m, &pivots, n)
            .iter()
            .map(|v| primitive(v))
            .collect::<Result<_>>()?;
        let rows = m.iter().map(|r| primitive(r)).collect::<Result<_>>()?;
        Ok(Self { rows, normals })
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let rows: Vec<Vec<BigRational>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| rat(x)).collect())
            .collect();
        Self::canonicalize(&rows)
    }

    /// The span of standard basis vectors `e_k` for the given 1-based `ks`.
    pub fn coordinate(n: usize, ks: &[usize]) -> Result<Self> {
        let rows: Vec<Vec<i64>> = ks
            .iter()
            .map(|&k| (1..=n).map(|c| i64::from(c == k)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// The subspace orthogonal to the given vectors.
    pub fn annihilator(n: usize, vectors: &[Vec<i64>]) -> Result<Self> {
        let m: Vec<Vec<BigRational>> = vectors
            .iter()
            .map(|r| r.iter().map(|&x| rat(x)).collect())
            .collect();
        let (m, pivots) = rref(m, n);
        Self::canonicalize(&null_space(&m, &pivots, n))
    }

    pub fn ambient(&self) -> usize {
        self.rows[0].len()
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn normals(&self) -> &[Vec<i64>] {
        &self.normals
    }

    /// Largest absolute coordinate of the canonical rows.
    pub fn height(&self) -> i64 {
        self.rows
            .iter()
            .flatten()
            .map(|x| x.abs())
            .max()
            .unwrap_or(0)
    }

    pub fn contains_vector(&self, v: &[i64]) -> bool {
        self.normals.iter().all(|c| dot(c, v) == 0)
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.dim() <= other.dim() && self.rows.iter().all(|r| other.contains_vector(r))
    }

    /// `a ⊆ b` or `b ⊆ a`.
    pub fn nested(&self, other: &Subspace) -> Result<bool> {
        if self.ambient() != other.ambient() {
            return Err(Error::Subspace(format!(
                "ambient dimensions {} and {} differ",
                self.ambient(),
                other.ambient()
            )));
        }
        Ok(self.is_subspace_of(other) || other.is_subspace_of(self))
    }

    /// `None` when the intersection is zero.
    pub fn intersection(&self, other: &Subspace) -> Option<Subspace> {
        let n = self.ambient();
        let mut normals = self.normals.clone();
        normals.extend(other.normals.iter().cloned());
        Self::annihilator(n, &normals).ok()
    }
}

impl Serialize for Subspace {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            dim: usize,
            rows: &'a [Vec<i64>],
        }
        Repr {
            dim: self.dim(),
            rows: &self.rows,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Subspace {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            dim: usize,
            rows: Vec<Vec<i64>>,
        }
        let r = Repr::deserialize(d)?;
        let s = Subspace::from_rows(&r.rows).map_err(de::Error::custom)?;
        if s.dim() != r.dim || s.rows != r.rows {
            return Err(de::Error::custom("subspace is not in canonical form"));
        }
        Ok(s)
    }
}

/// Integer vectors of `len` entries with largest absolute entry exactly `h`,
/// primitive, first nonzero entry positive, ordered by number of nonzero
/// entries and then lexicographically.
fn primitive_vectors(len: usize, h: i64) -> Vec<Vec<i64>> {
    let mut out = signed_vectors(len, h);
    out.sort_by_cached_key(|v| (v.iter().filter(|&&x| x != 0).count(), v.clone()));
    out
}

fn signed_vectors(len: usize, h: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut v = vec![-h; len];
    loop {
        let first = v.iter().find(|&&x| x != 0);
        if first.is_some_and(|&x| x > 0)
            && v.iter().any(|x| x.abs() == h)
            && v.iter().fold(0, |g, &x| g.gcd(&x)) == 1
        {
            out.push(v.clone());
        }
        // Odometer increment, last coordinate fastest.
        let mut k = len;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if v[k] < h {
                v[k] += 1;
                break;
            }
            v[k] = -h;
        }
    }
}

/// Canonical `k x d` coordinate matrices (reduced echelon, primitive rows,
/// positive pivots) whose largest absolute entry is exactly `h`, ordered by
/// number of nonzero entries, then by rows in descending lexicographic
/// order.
fn canonical_matrices(k: usize, d: usize, h: i64) -> Vec<Vec<Vec<i64>>> {
    let mut out = Vec::new();
    let mut pivots = Vec::with_capacity(k);
    pivot_sets(k, d, 0, &mut pivots, &mut |p| {
        let choices: Vec<Vec<Vec<i64>>> = (0..k).map(|r| row_choices(p, r, d, h)).collect();
        let mut idx = vec![0usize; k];
        if choices.iter().any(Vec::is_empty) {
            return;
        }
        loop {
            let m: Vec<Vec<i64>> = (0..k).map(|r| choices[r][idx[r]].clone()).collect();
            if m.iter().flatten().any(|x| x.abs() == h) {
                out.push(m);
            }
            let mut r = k;
            loop {
                if r == 0 {
                    return;
                }
                r -= 1;
                idx[r] += 1;
                if idx[r] < choices[r].len() {
                    break;
                }
                idx[r] = 0;
            }
        }
    });
    out.sort_by_cached_key(|m| {
        let support = m.iter().flatten().filter(|&&x| x != 0).count();
        (support, Reverse(m.clone()))
    });
    out
}

fn pivot_sets(k: usize, d: usize, from: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if cur.len() == k {
        f(cur);
        return;
    }
    for c in from..d {
        cur.push(c);
        pivot_sets(k, d, c + 1, cur, f);
        cur.pop();
    }
}

/// Primitive rows with pivot `p[r]`, zero at the other pivots, entries
/// bounded by `h`.
fn row_choices(p: &[usize], r: usize, d: usize, h: i64) -> Vec<Vec<i64>> {
    let free: Vec<usize> = (p[r] + 1..d).filter(|c| !p.contains(c)).collect();
    let mut out = Vec::new();
    for lead in 1..=h {
        let mut vals = vec![-h; free.len()];
        loop {
            let mut row = vec![0i64; d];
            row[p[r]] = lead;
            for (&c, &v) in free.iter().zip(&vals) {
                row[c] = v;
            }
            if row.iter().fold(0, |g, &x| g.gcd(&x)) == 1 {
                out.push(row);
            }
            let mut k = free.len();
            let done = loop {
                if k == 0 {
                    break true;
                }
                k -= 1;
                if vals[k] < h {
                    vals[k] += 1;
                    break false;
                }
                vals[k] = -h;
            };
            if done {
                break;
            }
        }
    }
    out
}

/// Entry point to the lazily enumerated substrate of `Q^n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubstrateHandle {
    pub n: usize,
    /// Largest height any enumeration has had to reach.
    pub height_bound: i64,
}

/// Enumeration never goes beyond this height; callers asking for more
/// subspaces than exist below it get an error instead of a hang.
const MAX_HEIGHT: i64 = 64;

impl SubstrateHandle {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Subspace(format!("ambient dimension {n} < 3")));
        }
        Ok(Self { n, height_bound: 1 })
    }

    fn check(&self, s: &Subspace) -> Result<()> {
        if s.ambient() != self.n {
            return Err(Error::Subspace(format!(
                "subspace lives in Q^{}, substrate is Q^{}",
                s.ambient(),
                self.n
            )));
        }
        Ok(())
    }

    /// The first `count` hyperplanes containing `z` and not in `skip`,
    /// ordered by the height of their primitive normal, then by its number
    /// of nonzero entries, then by the normal lexicographically.
    pub fn hyperplanes_through(
        &mut self,
        z: &Subspace,
        skip: &BTreeSet<Subspace>,
        count: usize,
    ) -> Result<Vec<Subspace>> {
        self.check(z)?;
        if z.dim() + 1 >= self.n {
            return Err(Error::Subspace(
                "z must have dimension at most n - 2".into(),
            ));
        }
        self.hyperplane_search(Some(z), skip, count)
    }

    /// Like [`Self::hyperplanes_through`] without a containment constraint.
    pub fn hyperplanes(
        &mut self,
        skip: &BTreeSet<Subspace>,
        count: usize,
    ) -> Result<Vec<Subspace>> {
        self.hyperplane_search(None, skip, count)
    }

    fn hyperplane_search(
        &mut self,
        z: Option<&Subspace>,
        skip: &BTreeSet<Subspace>,
        count: usize,
    ) -> Result<Vec<Subspace>> {
        let mut out = Vec::new();
        let mut h = 1;
        while out.len() < count {
            if h > MAX_HEIGHT {
                return Err(Error::Subspace("enumeration height exhausted".into()));
            }
            self.height_bound = self.height_bound.max(h);
            for c in primitive_vectors(self.n, h) {
                if z.is_some_and(|z| !z.rows().iter().all(|r| dot(r, &c) == 0)) {
                    continue;
                }
                let hyper = Subspace::annihilator(self.n, &[c])?;
                if !skip.contains(&hyper) {
                    out.push(hyper);
                    if out.len() == count {
                        break;
                    }
                }
            }
            h += 1;
        }
        Ok(out)
    }

    /// Every subspace of dimension `dim` whose canonical rows have height at
    /// most `h`, by height, then support size, then rows in descending
    /// order.
    pub fn subspaces_up_to(&self, dim: usize, h: i64) -> Result<Vec<Subspace>> {
        if dim == 0 || dim >= self.n {
            return Err(Error::Subspace(format!(
                "dimension {dim} outside 1..{}",
                self.n
            )));
        }
        let mut out = Vec::new();
        for height in 1..=h {
            for rows in canonical_matrices(dim, self.n, height) {
                out.push(Subspace::from_rows(&rows)?);
            }
        }
        Ok(out)
    }

    /// The first `count` subspaces of dimension `dim` inside `a`, ordered
    /// by the height of their canonical coordinate matrix in `a`'s basis,
    /// then by support size, then by coordinate rows in descending order.
    pub fn subspaces_within(
        &mut self,
        a: &Subspace,
        dim: usize,
        count: usize,
    ) -> Result<Vec<Subspace>> {
        self.check(a)?;
        if dim == 0 || dim >= a.dim() {
            return Err(Error::Subspace(format!(
                "dimension {dim} outside 1..{}",
                a.dim()
            )));
        }
        let mut out = Vec::new();
        let mut h = 1;
        while out.len() < count {
            if h > MAX_HEIGHT {
                return Err(Error::Subspace("enumeration height exhausted".into()));
            }
            self.height_bound = self.height_bound.max(h);
            for coords in canonical_matrices(dim, a.dim(), h) {
                let rows: Vec<Vec<i64>> = coords
                    .iter()
                    .map(|c| {
                        (0..self.n)
                            .map(|col| c.iter().zip(a.rows()).map(|(&x, r)| x * r[col]).sum())
                            .collect()
                    })
                    .collect();
                out.push(Subspace::from_rows(&rows)?);
                if out.len() == count {
                    break;
                }
            }
            h += 1;
        }
        Ok(out)
    }

    /// Every hyperplane containing `z` whose normal has height at most `h`.
    pub fn hyperplanes_up_to(&self, z: &Subspace, h: i64) -> Result<Vec<Subspace>> {
        self.check(z)?;
        let mut out = Vec::new();
        for height in 1..=h {
            for c in primitive_vectors(self.n, height) {
                if z.rows().iter().all(|r| dot(r, &c) == 0) {
                    out.push(Subspace::annihilator(self.n, &[c])?);
                }
            }
        }
        Ok(out)
    }
}
