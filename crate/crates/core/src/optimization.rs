//! Cost and peak objectives over the vertex hull, the centralized exact
//! problem, the no-flexibility baseline and the UPR metric.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::aggregation::{Profiles, VertexMatrix};
use crate::disaggregation::HullWeights;
use crate::lp::{simplex_solve, LinearProgram, LpStatus, Sense};
use crate::num::powi;
use crate::polytope::StorageSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ObjectiveKind {
    Cost,
    Peak,
}

/// Objective of the aggregate profile `x`:
/// `c^T (x + q) dt` for cost, `||x + q||_inf` for peak.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ObjectiveSpec {
    pub kind: ObjectiveKind,
    /// Energy prices per period (empty for peak).
    pub prices: Vec<f64>,
    /// Summed household demand per period.
    pub demand_sum: Vec<f64>,
    pub dt: f64,
}

impl ObjectiveSpec {
    pub fn cost(prices: Vec<f64>, demand_sum: Vec<f64>, dt: f64) -> Result<Self> {
        let s = Self {
            kind: ObjectiveKind::Cost,
            prices,
            demand_sum,
            dt,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn peak(demand_sum: Vec<f64>, dt: f64) -> Result<Self> {
        let s = Self {
            kind: ObjectiveKind::Peak,
            prices: Vec::new(),
            demand_sum,
            dt,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.demand_sum.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.demand_sum.is_empty() {
            return Err(Error::InvalidParameter(
                "demand must have at least one period".into(),
            ));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt = {} must be > 0",
                self.dt
            )));
        }
        if self.kind == ObjectiveKind::Cost && self.prices.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: self.prices.len(),
            });
        }
        if self
            .prices
            .iter()
            .chain(&self.demand_sum)
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidParameter("non-finite price or demand".into()));
        }
        Ok(())
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        self.validate()?;
        if self.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: self.dim(),
            });
        }
        Ok(())
    }

    /// Objective value of aggregate profile `x`.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let net = x.iter().zip(&self.demand_sum).map(|(a, q)| a + q);
        match self.kind {
            ObjectiveKind::Cost => net.zip(&self.prices).map(|(v, c)| c * v).sum::<f64>() * self.dt,
            ObjectiveKind::Peak => net.map(f64::abs).fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HullSolution {
    pub value: f64,
    pub weights: HullWeights,
    /// `V * weights`.
    pub argmin_profile: Vec<f64>,
}

fn hull_solution(vm: &VertexMatrix, obj: &ObjectiveSpec, w: &[f64]) -> Result<HullSolution> {
    let argmin_profile = vm.combine(w)?;
    Ok(HullSolution {
        value: obj.evaluate(&argmin_profile),
        weights: HullWeights::from_columns(vm, w)?,
        argmin_profile,
    })
}

fn require_kind(obj: &ObjectiveSpec, kind: ObjectiveKind) -> Result<()> {
    if obj.kind != kind {
        return Err(Error::InvalidParameter(format!(
            "expected a {kind:?} objective, got {:?}",
            obj.kind
        )));
    }
    Ok(())
}

/// Best column for a cost objective. Ties go to the lowest column index.
pub fn min_cost_over_hull(vm: &VertexMatrix, obj: &ObjectiveSpec) -> Result<HullSolution> {
    require_kind(obj, ObjectiveKind::Cost)?;
    obj.check_dim(vm.dim())?;
    if vm.num_columns() == 0 {
        return Err(Error::InvalidParameter(
            "vertex matrix has no columns".into(),
        ));
    }
    let mut best = 0;
    let mut best_score = f64::INFINITY;
    for (c, col) in vm.columns().iter().enumerate() {
        let score: f64 = col.iter().zip(&obj.prices).map(|(v, p)| v * p).sum();
        if score < best_score {
            best = c;
            best_score = score;
        }
    }
    let mut w = vec![0.0; vm.num_columns()];
    w[best] = 1.0;
    hull_solution(vm, obj, &w)
}

/// `min t` s.t. `-t <= V a + q <= t`, `sum a = 1`, `a >= 0`.
pub fn min_peak_over_hull(vm: &VertexMatrix, obj: &ObjectiveSpec) -> Result<HullSolution> {
    require_kind(obj, ObjectiveKind::Peak)?;
    let d = vm.dim();
    obj.check_dim(d)?;
    let m = vm.num_columns();
    if m == 0 {
        return Err(Error::InvalidParameter(
            "vertex matrix has no columns".into(),
        ));
    }
    let mut objective = vec![0.0; m + 1];
    objective[m] = 1.0;
    let mut lp = LinearProgram::new(objective);
    for t in 0..d {
        let mut up = vec![0.0; m + 1];
        for (c, col) in vm.columns().iter().enumerate() {
            up[c] = col[t];
        }
        let mut down: Vec<f64> = up.iter().map(|v| -v).collect();
        up[m] = -1.0;
        down[m] = -1.0;
        lp.add_row(up, Sense::Le, -obj.demand_sum[t]);
        lp.add_row(down, Sense::Le, obj.demand_sum[t]);
    }
    let mut sum = vec![1.0; m + 1];
    sum[m] = 0.0;
    lp.add_row(sum, Sense::Eq, 1.0);
    let sol = simplex_solve(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Solver(sol.status));
    }
    let mut w: Vec<f64> = sol.x[..m].iter().map(|v| v.max(0.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    hull_solution(vm, obj, &w)
}

/// Dispatches on the objective kind.
pub fn min_over_hull(vm: &VertexMatrix, obj: &ObjectiveSpec) -> Result<HullSolution> {
    match obj.kind {
        ObjectiveKind::Cost => min_cost_over_hull(vm, obj),
        ObjectiveKind::Peak => min_peak_over_hull(vm, obj),
    }
}

/// Layout of the stacked device program: `x[i][t]` at `i*d + t`, the
/// per-device SoC offsets at `n*d + i*d + t`, extra variables after.
struct Stacked {
    n: usize,
    d: usize,
}

impl Stacked {
    fn new(specs: &[StorageSpec]) -> Result<Self> {
        let first = specs
            .first()
            .ok_or_else(|| Error::InvalidParameter("need at least one device".into()))?;
        for s in specs {
            s.validate()?;
            if s.d != first.d {
                return Err(Error::DimensionMismatch {
                    expected: first.d,
                    found: s.d,
                });
            }
        }
        Ok(Self {
            n: specs.len(),
            d: first.d,
        })
    }

    fn num_vars(&self) -> usize {
        2 * self.n * self.d
    }

    fn x(&self, i: usize, t: usize) -> usize {
        i * self.d + t
    }

    /// Adds the device constraints. Power limits become variable bounds; the
    /// upper and lower SoC rows of each period share one equality row with a
    /// bounded offset variable.
    fn constrain(&self, specs: &[StorageSpec], lp: &mut LinearProgram) {
        let (n, d) = (self.n, self.d);
        let total = lp.num_vars();
        for (i, spec) in specs.iter().enumerate() {
            let pows: Vec<f64> = (0..=d).map(|k| powi(spec.alpha, k)).collect();
            for t in 0..d {
                lp.set_bounds(self.x(i, t), spec.x_min, spec.x_max);
                let decay = spec.s0 * pows[t + 1];
                let floor = if t + 1 < d { spec.s_min } else { spec.s_f };
                let s = n * d + i * d + t;
                lp.set_bounds(s, (floor - decay) / spec.dt, (spec.s_max - decay) / spec.dt);
                let mut row = vec![0.0; total];
                for tau in 0..=t {
                    row[self.x(i, tau)] = pows[t - tau];
                }
                row[s] = -1.0;
                lp.add_row(row, Sense::Eq, 0.0);
            }
        }
    }

    fn aggregate(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        for i in 0..self.n {
            for (o, v) in out.iter_mut().zip(&x[i * self.d..(i + 1) * self.d]) {
                *o += v;
            }
        }
        out
    }
}

/// Optimal value over the exact Minkowski sum, from one LP over all device
/// constraints.
pub fn exact_optimum(specs: &[StorageSpec], obj: &ObjectiveSpec) -> Result<f64> {
    let layout = Stacked::new(specs)?;
    let (n, d) = (layout.n, layout.d);
    obj.check_dim(d)?;
    let base = layout.num_vars();
    let mut lp = match obj.kind {
        ObjectiveKind::Cost => {
            let mut c = vec![0.0; base];
            for i in 0..n {
                for t in 0..d {
                    c[layout.x(i, t)] = obj.prices[t] * obj.dt;
                }
            }
            LinearProgram::new(c)
        }
        ObjectiveKind::Peak => {
            let mut c = vec![0.0; base + 1];
            c[base] = 1.0;
            LinearProgram::new(c)
        }
    };
    layout.constrain(specs, &mut lp);
    if obj.kind == ObjectiveKind::Peak {
        for t in 0..d {
            let mut up: Vec<(usize, f64)> = (0..n).map(|i| (layout.x(i, t), 1.0)).collect();
            let mut down: Vec<(usize, f64)> = (0..n).map(|i| (layout.x(i, t), -1.0)).collect();
            up.push((base, -1.0));
            down.push((base, -1.0));
            lp.add_sparse_row(&up, Sense::Le, -obj.demand_sum[t]);
            lp.add_sparse_row(&down, Sense::Le, obj.demand_sum[t]);
        }
    }
    let sol = simplex_solve(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Solver(sol.status));
    }
    Ok(obj.evaluate(&layout.aggregate(&sol.x)))
}

/// Objective at `x = 0`.
pub fn no_flex_value(obj: &ObjectiveSpec) -> f64 {
    obj.evaluate(&vec![0.0; obj.dim()])
}

/// Unused potential ratio in percent.
pub fn upr(z_approx: f64, z_exact: f64, z_noflex: f64, tol: f64) -> Result<f64> {
    let span = z_noflex - z_exact;
    if span.abs() < tol * z_noflex.abs().max(z_exact.abs()).max(1.0) {
        return Err(Error::DegenerateBaseline);
    }
    Ok(100.0 * (z_approx - z_exact) / span)
}

/// Convex weights expressing `x` over `points`, or `None` if `x` is outside
/// their hull.
pub fn convex_combination(points: &[&[f64]], x: &[f64]) -> Result<Option<Vec<f64>>> {
    let d = x.len();
    if let Some(p) = points.iter().find(|p| p.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: p.len(),
        });
    }
    if points.is_empty() {
        return Ok(None);
    }
    let k = points.len();
    let mut lp = LinearProgram::new(vec![0.0; k]);
    for t in 0..d {
        lp.add_row(points.iter().map(|p| p[t]).collect(), Sense::Eq, x[t]);
    }
    lp.add_row(vec![1.0; k], Sense::Eq, 1.0);
    let sol = simplex_solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(Some(sol.x)),
        LpStatus::Infeasible => Ok(None),
        s => Err(Error::Solver(s)),
    }
}

/// Device profiles `x_i` in each device set with `sum x_i = x`, or `None` if
/// `x` is outside the exact Minkowski sum.
pub fn decompose_into_devices(specs: &[StorageSpec], x: &[f64]) -> Result<Option<Profiles>> {
    let layout = Stacked::new(specs)?;
    let (n, d) = (layout.n, layout.d);
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: x.len(),
        });
    }
    let mut lp = LinearProgram::new(vec![0.0; layout.num_vars()]);
    layout.constrain(specs, &mut lp);
    for (t, &xt) in x.iter().enumerate() {
        let row: Vec<(usize, f64)> = (0..n).map(|i| (layout.x(i, t), 1.0)).collect();
        lp.add_sparse_row(&row, Sense::Eq, xt);
    }
    let sol = simplex_solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => Profiles::from_flat(d, sol.x[..n * d].to_vec()).map(Some),
        LpStatus::Infeasible => Ok(None),
        s => Err(Error::Solver(s)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::aggregate;
    use crate::testutil::example_battery;

    fn two_batteries() -> VertexMatrix {
        let spec = example_battery();
        aggregate(&[spec, spec], 4, 0).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn cost_picks_the_best_column() {
        let vm = two_batteries();
        let obj = ObjectiveSpec::cost(vec![1.0, -1.0], vec![1.0, 1.0], 1.0).unwrap();
        let sol = min_cost_over_hull(&vm, &obj).unwrap();
        assert_eq!(sol.value, -4.0);
        assert_eq!(sol.argmin_profile, vec![-2.0, 2.0]);
        assert_eq!(sol.weights, HullWeights::one_hot(4, 1));
        assert_eq!(no_flex_value(&obj), 0.0);
        assert!(close(
            exact_optimum(&[example_battery(); 2], &obj).unwrap(),
            -4.0
        ));
        assert_eq!(upr(-4.0, -4.0, 0.0, 1e-9).unwrap(), 0.0);
    }

    #[test]
    fn zero_prices_tie_to_first_column() {
        let vm = two_batteries();
        let obj = ObjectiveSpec::cost(vec![0.0, 0.0], vec![1.0, 1.0], 1.0).unwrap();
        let sol = min_cost_over_hull(&vm, &obj).unwrap();
        assert_eq!(sol.value, 0.0);
        assert_eq!(sol.weights.alpha[0], 1.0);
    }

    #[test]
    fn peak_worked_example() {
        let vm = two_batteries();
        let obj = ObjectiveSpec::peak(vec![1.0, 1.0], 1.0).unwrap();
        let sol = min_peak_over_hull(&vm, &obj).unwrap();
        assert!(close(sol.value, 1.0 / 3.0));
        assert!(close(sol.argmin_profile[0], -2.0 / 3.0));
        assert!(close(sol.argmin_profile[1], -2.0 / 3.0));
        let exact = exact_optimum(&[example_battery(); 2], &obj).unwrap();
        assert!(close(exact, 0.0));
        let nf = no_flex_value(&obj);
        assert_eq!(nf, 1.0);
        let u = upr(sol.value, exact, nf, 1e-9).unwrap();
        assert!((u - 100.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn peak_singleton_hull() {
        let cols = Profiles::from_flat(2, vec![0.5, -3.0]).unwrap();
        let vm =
            VertexMatrix::from_parts(cols, vec![crate::SignVector::all_charge(2)], false, None)
                .unwrap();
        let obj = ObjectiveSpec::peak(vec![1.0, 1.0], 0.25).unwrap();
        assert!(close(min_peak_over_hull(&vm, &obj).unwrap().value, 2.0));
    }

    #[test]
    fn baselines() {
        let obj = ObjectiveSpec::peak(vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(no_flex_value(&obj), 0.0);
        assert_eq!(upr(1.0, 0.0, 0.0, 1e-9), Err(Error::DegenerateBaseline));
        assert_eq!(upr(1.0, 0.0, 1.0, 1e-9).unwrap(), 100.0);
    }

    #[test]
    fn single_device_exact_matches_the_polytope() {
        // min x1 - x2 over the hexagon is -2 at (-1, 1).
        let obj = ObjectiveSpec::cost(vec![1.0, -1.0], vec![0.0, 0.0], 1.0).unwrap();
        assert!(close(
            exact_optimum(&[example_battery()], &obj).unwrap(),
            -2.0
        ));
    }

    #[test]
    fn mismatched_kinds_and_dims_are_rejected() {
        let vm = two_batteries();
        let peak = ObjectiveSpec::peak(vec![1.0, 1.0], 1.0).unwrap();
        assert!(min_cost_over_hull(&vm, &peak).is_err());
        let short = ObjectiveSpec::peak(vec![1.0], 1.0).unwrap();
        assert!(min_peak_over_hull(&vm, &short).is_err());
        assert!(ObjectiveSpec::cost(vec![1.0], vec![1.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn decomposition() {
        let specs = [example_battery(); 2];
        let parts = decompose_into_devices(&specs, &[-1.0, -1.0])
            .unwrap()
            .unwrap();
        let sum: Vec<f64> = (0..2).map(|t| parts.get(0)[t] + parts.get(1)[t]).collect();
        assert!(close(sum[0], -1.0) && close(sum[1], -1.0));
        assert!(decompose_into_devices(&specs, &[-3.0, 0.0])
            .unwrap()
            .is_none());
        let w = convex_combination(&[&[0.0, 0.0], &[2.0, 0.0]], &[1.0, 0.0])
            .unwrap()
            .unwrap();
        assert!(close(w[0], 0.5));
        assert!(convex_combination(&[&[0.0, 0.0], &[2.0, 0.0]], &[1.0, 1.0])
            .unwrap()
            .is_none());
    }
}
