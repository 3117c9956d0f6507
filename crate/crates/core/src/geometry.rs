//! Brute-force geometry for small dimensions: vertex enumeration of
//! H-polytopes, exact Minkowski sums and vertex / convex-independence tests.
//! Meant as a reference for testing, not for production sizes.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::num::linf_distance;
use crate::optimization::convex_combination;
use crate::polytope::{contains, HPolytope};
use crate::{Error, Result};

/// L-infinity distance below which two points are considered equal.
pub const DEDUPE_TOL: f64 = 1e-7;
/// Largest dimension accepted by [`enumerate_vertices`].
pub const MAX_ENUMERATION_DIM: usize = 4;
/// Largest number of sums formed by [`minkowski_vertex_candidates`].
pub const MAX_MINKOWSKI_PRODUCT: usize = 1_000_000;

/// Points in lexicographic order, pairwise further apart than
/// [`DEDUPE_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct VertexSet {
    dim: usize,
    points: Vec<Vec<f64>>,
}

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

impl VertexSet {
    pub fn new(dim: usize, mut points: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.len(),
            });
        }
        points.sort_by(|a, b| lex(a, b));
        let mut kept: Vec<Vec<f64>> = Vec::with_capacity(points.len());
        for p in points {
            // Kept points are sorted by their first coordinate, so only a
            // trailing window can be within tolerance.
            let dup = kept
                .iter()
                .rev()
                .take_while(|q| dim == 0 || p[0] - q[0] <= DEDUPE_TOL)
                .any(|q| linf_distance(q, &p) <= DEDUPE_TOL);
            if !dup {
                kept.push(p);
            }
        }
        Ok(Self { dim, points: kept })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Whether some point lies within [`DEDUPE_TOL`] of `x`.
    pub fn contains_point(&self, x: &[f64]) -> bool {
        self.points
            .iter()
            .any(|p| linf_distance(p, x) <= DEDUPE_TOL)
    }
}

/// Solves the square system `m y = rhs` by Gaussian elimination with full
/// pivoting. `None` if the matrix is numerically singular.
fn solve_square(mut m: Vec<f64>, mut rhs: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    // Squared largest row norm; the pivot threshold is 1e-9 times the norm.
    let norm_sq = (0..n)
        .map(|r| m[r * n..(r + 1) * n].iter().map(|v| v * v).sum::<f64>())
        .fold(0.0, f64::max);
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut best = (k, k, 0.0);
        for r in k..n {
            for c in k..n {
                let v = m[r * n + c].abs();
                if v > best.2 {
                    best = (r, c, v);
                }
            }
        }
        let (pr, pc, pv) = best;
        if pv == 0.0 || pv * pv < 1e-18 * norm_sq {
            return None;
        }
        if pr != k {
            for c in 0..n {
                m.swap(pr * n + c, k * n + c);
            }
            rhs.swap(pr, k);
        }
        if pc != k {
            for r in 0..n {
                m.swap(r * n + pc, r * n + k);
            }
            perm.swap(pc, k);
        }
        let piv = m[k * n + k];
        for r in k + 1..n {
            let f = m[r * n + k] / piv;
            if f != 0.0 {
                for c in k..n {
                    m[r * n + c] -= f * m[k * n + c];
                }
                rhs[r] -= f * rhs[k];
            }
        }
    }
    let mut y = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|c| m[k * n + c] * y[c]).sum();
        y[k] = (rhs[k] - s) / m[k * n + k];
    }
    let mut out = vec![0.0; n];
    for (k, &col) in perm.iter().enumerate() {
        out[col] = y[k];
    }
    Some(out)
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Vertices of a bounded H-polytope by solving every `d`-subset of rows.
pub fn enumerate_vertices(p: &HPolytope) -> Result<VertexSet> {
    let d = p.dim();
    let m = p.num_rows();
    if d == 0 || d > MAX_ENUMERATION_DIM {
        return Err(Error::GuardExceeded(format!(
            "vertex enumeration supports 1 <= d <= {MAX_ENUMERATION_DIM}, got {d}"
        )));
    }
    if binomial(m, d) > MAX_MINKOWSKI_PRODUCT {
        return Err(Error::GuardExceeded(format!(
            "{m} rows choose {d} is too many subsets"
        )));
    }
    let mut found = Vec::new();
    if m < d {
        return VertexSet::new(d, found);
    }
    let mut idx: Vec<usize> = (0..d).collect();
    loop {
        let mut a = Vec::with_capacity(d * d);
        let mut rhs = Vec::with_capacity(d);
        for &k in &idx {
            a.extend_from_slice(p.row(k));
            rhs.push(p.offsets()[k]);
        }
        if let Some(x) = solve_square(a, rhs, d) {
            if contains(p, &x, 1e-9)? {
                found.push(x);
            }
        }
        // next combination
        let mut i = d;
        while i > 0 && idx[i - 1] == m - d + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        idx[i - 1] += 1;
        for j in i..d {
            idx[j] = idx[j - 1] + 1;
        }
    }
    VertexSet::new(d, found)
}

/// All sums of one point per set.
pub fn minkowski_vertex_candidates(sets: &[VertexSet]) -> Result<VertexSet> {
    let first = sets
        .first()
        .ok_or_else(|| Error::InvalidParameter("need at least one set".into()))?;
    let d = first.dim();
    if let Some(s) = sets.iter().find(|s| s.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: s.dim(),
        });
    }
    let product = sets
        .iter()
        .fold(1usize, |acc, s| acc.saturating_mul(s.len()));
    if product > MAX_MINKOWSKI_PRODUCT {
        return Err(Error::GuardExceeded(format!(
            "{product} candidate sums exceed {MAX_MINKOWSKI_PRODUCT}"
        )));
    }
    let mut acc = first.clone();
    for s in &sets[1..] {
        let mut sums = Vec::with_capacity(acc.len() * s.len());
        for a in acc.points() {
            for b in s.points() {
                sums.push(a.iter().zip(b).map(|(x, y)| x + y).collect());
            }
        }
        acc = VertexSet::new(d, sums)?;
    }
    Ok(acc)
}

/// Whether `x` is one of `candidates` and not a convex combination of the
/// others.
pub fn is_vertex_of_hull(x: &[f64], candidates: &VertexSet) -> Result<bool> {
    if x.len() != candidates.dim() {
        return Err(Error::DimensionMismatch {
            expected: candidates.dim(),
            found: x.len(),
        });
    }
    if !candidates.contains_point(x) {
        return Ok(false);
    }
    let others: Vec<&[f64]> = candidates
        .points()
        .iter()
        .filter(|p| linf_distance(p, x) > DEDUPE_TOL)
        .map(Vec::as_slice)
        .collect();
    Ok(convex_combination(&others, x)?.is_none())
}

/// Whether no point of the set is a convex combination of the others.
pub fn convex_independent(points: &VertexSet) -> Result<bool> {
    for p in points.points() {
        if !is_vertex_of_hull(p, points)? {
            return Ok(false);
        }
    }
    Ok(true)
}
