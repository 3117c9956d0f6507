//! H-polytopes and the battery flexibility polytope.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lp::{simplex_solve, LinearProgram, LpStatus, Sense};
use crate::num::{powi, scaled};
use crate::{Error, Result, DEFAULT_TOL};

/// A set `{x : A x <= b}` in `dim`-dimensional power space.
///
/// `A` is stored row-major. Boundedness is not checked on construction, see
/// [`HPolytope::coordinate_bounds`].
#[derive(Debug, Clone, PartialEq)]
pub struct HPolytope {
    dim: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl HPolytope {
    /// Builds a polytope from a row-major `rows x dim` matrix and offsets.
    pub fn new(dim: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "polytope dimension must be >= 1".into(),
            ));
        }
        if b.is_empty() {
            return Err(Error::InvalidParameter(
                "polytope needs at least one row".into(),
            ));
        }
        if a.len() != b.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: b.len() * dim,
                found: a.len(),
            });
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite polytope entry".into()));
        }
        Ok(Self { dim, a, b })
    }

    pub fn from_rows(rows: &[&[f64]], b: &[f64]) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.len());
        if rows.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                found: b.len(),
            });
        }
        let mut a = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            a.extend_from_slice(row);
        }
        Self::new(dim, a, b.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.a[k * self.dim..(k + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.a.chunks_exact(self.dim)
    }

    pub fn offsets(&self) -> &[f64] {
        &self.b
    }

    /// Returns `(lower, upper)` for every coordinate, or `None` if some
    /// coordinate is unbounded or the polytope is empty.
    pub fn coordinate_bounds(&self) -> Option<Vec<(f64, f64)>> {
        let mut bounds = Vec::with_capacity(self.dim);
        for t in 0..self.dim {
            let mut extremes = [0.0; 2];
            for (slot, sign) in [(0usize, 1.0), (1, -1.0)] {
                let mut c = vec![0.0; self.dim];
                c[t] = sign;
                let lp = self.as_lp(c);
                let sol = simplex_solve(&lp).ok()?;
                if sol.status != LpStatus::Optimal {
                    return None;
                }
                extremes[slot] = sol.x[t];
            }
            bounds.push((extremes[0], extremes[1]));
        }
        Some(bounds)
    }

    pub fn is_bounded(&self) -> bool {
        self.coordinate_bounds().is_some()
    }

    /// `min c^T x` over the polytope with free variables.
    pub(crate) fn as_lp(&self, objective: Vec<f64>) -> LinearProgram {
        let mut lp = LinearProgram::new(objective).free_variables();
        for (row, &rhs) in self.rows().zip(&self.b) {
            lp.add_row(row.to_vec(), Sense::Le, rhs);
        }
        lp
    }

    /// Closed-form feasible interval of coordinate `t` (0-based) when the
    /// coordinates before `t` are fixed to `prefix` and the ones after are 0.
    ///
    /// Rows with a zero coefficient in column `t` are skipped.
    pub fn axis_interval(&self, prefix: &[f64], t: usize) -> (f64, f64) {
        let mut lower = f64::NEG_INFINITY;
        let mut upper = f64::INFINITY;
        for (row, &bk) in self.rows().zip(&self.b) {
            let coef = row[t];
            if coef == 0.0 {
                continue;
            }
            let residual = bk - row[..t].iter().zip(prefix).map(|(a, y)| a * y).sum::<f64>();
            let bound = residual / coef;
            if coef > 0.0 {
                upper = upper.min(bound);
            } else {
                lower = lower.max(bound);
            }
        }
        (lower, upper)
    }
}

/// Membership test `A x <= b + tol * max(1, |b|)` row by row.
pub fn contains(p: &HPolytope, x: &[f64], tol: f64) -> Result<bool> {
    if x.len() != p.dim {
        return Err(Error::DimensionMismatch {
            expected: p.dim,
            found: x.len(),
        });
    }
    Ok(p.rows().zip(&p.b).all(|(row, &bk)| {
        let lhs: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum();
        lhs <= bk + scaled(tol, bk)
    }))
}

/// `(x_1, ..., x_t, 0, ..., 0)` with `t` counted from 1.
pub fn project_prefix(x: &[f64], t: usize) -> Result<Vec<f64>> {
    if t == 0 || t > x.len() {
        return Err(Error::IndexOutOfRange {
            index: t,
            max: x.len(),
        });
    }
    let mut out = x.to_vec();
    out[t..].iter_mut().for_each(|v| *v = 0.0);
    Ok(out)
}

/// Parameters of one storage device over `d` periods.
///
/// Power in kW, energy in kWh, `dt` in hours.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StorageSpec {
    /// Self-discharge factor in (0, 1].
    pub alpha: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub dt: f64,
    pub s0: f64,
    /// Minimum final state of charge.
    pub s_f: f64,
    pub d: usize,
}

impl StorageSpec {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.alpha, self.x_min, self.x_max, self.s_min, self.s_max, self.dt, self.s0, self.s_f,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "non-finite storage parameter".into(),
            ));
        }
        if self.d == 0 {
            return Err(Error::InvalidParameter("d must be >= 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha = {} outside (0, 1]",
                self.alpha
            )));
        }
        if self.dt <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "dt = {} must be > 0",
                self.dt
            )));
        }
        if self.x_min > self.x_max {
            return Err(Error::InvalidParameter("x_min > x_max".into()));
        }
        if !(self.s_min <= self.s0 && self.s0 <= self.s_max) {
            return Err(Error::InvalidParameter(format!(
                "s0 = {} outside [{}, {}]",
                self.s0, self.s_min, self.s_max
            )));
        }
        if !(self.s_min <= self.s_f && self.s_f <= self.s_max) {
            return Err(Error::InvalidParameter(format!(
                "s_f = {} outside [{}, {}]",
                self.s_f, self.s_min, self.s_max
            )));
        }
        Ok(())
    }

    /// Same device with the final-energy requirement relaxed to `s_min`.
    pub fn relaxed(&self) -> Self {
        Self {
            s_f: self.s_min,
            ..*self
        }
    }

    /// Final state of charge reached by profile `x`.
    pub fn final_soc(&self, x: &[f64]) -> f64 {
        x.iter().fold(self.s0, |s, &p| self.alpha * s + p * self.dt)
    }
}

/// State-of-charge trajectory `S(1..=d)` for profile `x`.
pub fn simulate_soc(spec: &StorageSpec, x: &[f64]) -> Vec<f64> {
    let mut s = spec.s0;
    x.iter()
        .map(|&p| {
            s = spec.alpha * s + p * spec.dt;
            s
        })
        .collect()
}

/// The `4d`-row H-representation of the battery flexibility set.
///
/// Row blocks, in order: lower power bounds, upper power bounds, upper SoC
/// bounds for every period, lower SoC bounds for periods `1..d` and the
/// final-energy row.
pub fn battery_polytope(spec: &StorageSpec) -> Result<HPolytope> {
    spec.validate()?;
    let d = spec.d;
    let alpha_pows: Vec<f64> = (0..=d).map(|k| powi(spec.alpha, k)).collect();
    let mut a = vec![0.0; 4 * d * d];
    let mut b = vec![0.0; 4 * d];
    for t in 0..d {
        a[t * d + t] = -1.0;
        b[t] = -spec.x_min;
        a[(d + t) * d + t] = 1.0;
        b[d + t] = spec.x_max;
        for tau in 0..=t {
            let coef = alpha_pows[t - tau];
            a[(2 * d + t) * d + tau] = coef;
            a[(3 * d + t) * d + tau] = -coef;
        }
        let decay = spec.s0 * alpha_pows[t + 1];
        b[2 * d + t] = (spec.s_max - decay) / spec.dt;
        b[3 * d + t] = if t + 1 < d {
            (decay - spec.s_min) / spec.dt
        } else {
            (decay - spec.s_f) / spec.dt
        };
    }
    HPolytope::new(d, a, b)
}

/// Closed-form sufficient condition for both structural assumptions
/// (minimum flexibility per period, feasibility of prefix projections).
///
/// Requires `x_max > 0`, `x_min < 0`, `s_min < s_max`, `alpha^d s0 >= s_min`
/// and `s_f == s_min`. When `alpha < 1` the energy window must also contain 0,
/// otherwise a truncated profile decays out of `[s_min, s_max]`.
pub fn battery_satisfies_assumptions(spec: &StorageSpec) -> bool {
    if spec.validate().is_err() {
        return false;
    }
    let decay_ok = spec.alpha == 1.0 || (spec.s_min <= 0.0 && spec.s_max >= 0.0);
    spec.x_max > 0.0
        && spec.x_min < 0.0
        && spec.s_min < spec.s_max
        && powi(spec.alpha, spec.d) * spec.s0 >= spec.s_min
        && (spec.s_f - spec.s_min).abs() <= scaled(DEFAULT_TOL, spec.s_min)
        && decay_ok
}

/// Whether `B(s0, s_f, p)` is nonempty, decided with the greedy max-charge
/// trajectory (the pointwise largest SoC path that respects `s_max`).
pub fn battery_nonempty(spec: &StorageSpec) -> bool {
    if spec.validate().is_err() {
        return false;
    }
    let mut s = spec.s0;
    for _ in 0..spec.d {
        let cap = (spec.s_max - spec.alpha * s) / spec.dt;
        let y = spec.x_max.min(cap);
        if y < spec.x_min - scaled(DEFAULT_TOL, spec.x_min) {
            return false;
        }
        s = spec.alpha * s + y * spec.dt;
        if s < spec.s_min - scaled(DEFAULT_TOL, spec.s_min) {
            return false;
        }
    }
    s >= spec.s_f - scaled(DEFAULT_TOL, spec.s_f)
}

/// Which structural assumption a sampled point contradicts.
#[derive(Debug, Clone, PartialEq)]
pub enum AssumptionViolation {
    /// The origin is not in the set.
    ZeroInfeasible,
    /// `Proj^t(point)` left the set although `point` is feasible.
    ProjectionInfeasible { point: Vec<f64>, t: usize },
    /// Only `0` is admissible at period `t + 1` after the feasible prefix.
    NoSlack { point: Vec<f64>, t: usize },
}

/// Monte-Carlo falsifier for the structural assumptions on a generic polytope.
///
/// Samples points uniformly in the bounding box, keeps the feasible ones and
/// checks their projections. `Ok(None)` means "not falsified", which is weaker
/// than "holds".
pub fn falsify_assumptions(
    p: &HPolytope,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<Option<AssumptionViolation>> {
    let zero = vec![0.0; p.dim];
    if !contains(p, &zero, tol)? {
        return Ok(Some(AssumptionViolation::ZeroInfeasible));
    }
    let bounds = p
        .coordinate_bounds()
        .ok_or_else(|| Error::InvalidParameter("polytope is unbounded".into()))?;
    let check_slack = |point: &[f64], t: usize| {
        let (lo, hi) = p.axis_interval(point, t);
        hi - lo <= tol && lo.abs() <= tol && hi.abs() <= tol
    };
    if check_slack(&zero, 0) {
        return Ok(Some(AssumptionViolation::NoSlack { point: zero, t: 0 }));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut point = vec![0.0; p.dim];
    for _ in 0..samples {
        for (v, &(lo, hi)) in point.iter_mut().zip(&bounds) {
            *v = if hi > lo {
                rng.random_range(lo..=hi)
            } else {
                lo
            };
        }
        if !contains(p, &point, tol)? {
            continue;
        }
        for t in 1..p.dim {
            let proj = project_prefix(&point, t)?;
            if !contains(p, &proj, tol)? {
                return Ok(Some(AssumptionViolation::ProjectionInfeasible {
                    point: point.clone(),
                    t,
                }));
            }
            if check_slack(&proj, t) {
                return Ok(Some(AssumptionViolation::NoSlack { point: proj, t }));
            }
        }
    }
    Ok(None)
}
