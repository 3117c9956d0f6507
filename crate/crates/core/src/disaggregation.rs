//! Disaggregation of an aggregate profile given as convex weights over the
//! vertex matrix: each device receives the same convex combination of its
//! own corrected extreme actions.

use alloc::vec;
use alloc::vec::Vec;

use crate::aggregation::{sum_profiles, DeviceVertices, Profiles, VertexMatrix};
use crate::num::linf_distance;
use crate::optimization::convex_combination;
use crate::polytope::{battery_polytope, contains, StorageSpec};
use crate::{Error, Result};

/// Convex weights over the sign-vector columns plus the zero column.
#[derive(Debug, Clone, PartialEq)]
pub struct HullWeights {
    pub alpha: Vec<f64>,
    pub zero_weight: f64,
}

impl HullWeights {
    /// Checks nonnegativity and that the weights sum to one, both within `tol`.
    pub fn new(alpha: Vec<f64>, zero_weight: f64, tol: f64) -> Result<Self> {
        if alpha
            .iter()
            .chain([&zero_weight])
            .any(|w| !w.is_finite() || *w < -tol)
        {
            return Err(Error::InvalidParameter(
                "weights must be nonnegative".into(),
            ));
        }
        let total: f64 = alpha.iter().sum::<f64>() + zero_weight;
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidParameter(alloc::format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { alpha, zero_weight })
    }

    /// All weight on sign-vector column `c`.
    pub fn one_hot(len: usize, c: usize) -> Self {
        let mut alpha = vec![0.0; len];
        alpha[c] = 1.0;
        Self {
            alpha,
            zero_weight: 0.0,
        }
    }

    /// Splits a weight vector over all columns of `vm`.
    pub fn from_columns(vm: &VertexMatrix, weights: &[f64]) -> Result<Self> {
        if weights.len() != vm.num_columns() {
            return Err(Error::DimensionMismatch {
                expected: vm.num_columns(),
                found: weights.len(),
            });
        }
        let g = vm.sign_vectors().len();
        Ok(Self {
            alpha: weights[..g].to_vec(),
            zero_weight: weights.get(g).copied().unwrap_or(0.0),
        })
    }

    /// Weight vector over all columns of a matrix with or without zero column.
    pub fn to_columns(&self, has_zero_column: bool) -> Vec<f64> {
        let mut w = self.alpha.clone();
        if has_zero_column {
            w.push(self.zero_weight);
        }
        w
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisaggregationResult {
    /// One profile per device.
    pub schedules: Profiles,
    /// Sum of the device schedules.
    pub aggregate: Vec<f64>,
}

impl DisaggregationResult {
    /// Whether every schedule lies in its device set.
    pub fn feasible_for(&self, specs: &[StorageSpec], tol: f64) -> Result<bool> {
        if specs.len() != self.schedules.len() {
            return Err(Error::DimensionMismatch {
                expected: self.schedules.len(),
                found: specs.len(),
            });
        }
        for (spec, x) in specs.iter().zip(self.schedules.iter()) {
            if !contains(&battery_polytope(spec)?, x, tol)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn combine_device(dev: &DeviceVertices, i: usize, weights: &HullWeights, d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d];
    for (c, &w) in weights.alpha.iter().enumerate() {
        if w != 0.0 {
            for (o, v) in out.iter_mut().zip(dev.profile(i, c)) {
                *o += w * v;
            }
        }
    }
    out
}

/// Per-device schedules `sum_j alpha_j * y_i^j`.
///
/// Weight on the zero column contributes nothing. Identical-device matrices
/// are combined once and replicated.
pub fn disaggregate(weights: &HullWeights, vm: &VertexMatrix) -> Result<DisaggregationResult> {
    let dev = vm.per_device().ok_or(Error::MissingPerDevice)?;
    let g = vm.sign_vectors().len();
    if weights.alpha.len() != g {
        return Err(Error::DimensionMismatch {
            expected: g,
            found: weights.alpha.len(),
        });
    }
    if weights.zero_weight != 0.0 && !vm.has_zero_column() {
        return Err(Error::InvalidParameter(
            "zero-column weight given but the matrix has no zero column".into(),
        ));
    }
    let d = vm.dim();
    let n = dev.num_devices();
    let mut schedules = Profiles::with_capacity(d, n);
    match dev {
        DeviceVertices::Individual(_) => {
            for i in 0..n {
                schedules.push(&combine_device(dev, i, weights, d));
            }
        }
        DeviceVertices::Shared { .. } => {
            let shared = combine_device(dev, 0, weights, d);
            for _ in 0..n {
                schedules.push(&shared);
            }
        }
    }
    let aggregate = sum_profiles(&schedules);
    Ok(DisaggregationResult {
        schedules,
        aggregate,
    })
}

/// Finds convex weights expressing `x` over the columns of `vm`.
///
/// The result is a basic feasible solution of `{V a = x, sum a = 1, a >= 0}`,
/// so at most `d + 1` weights are nonzero; it is not unique in general.
pub fn weights_for_point(x: &[f64], vm: &VertexMatrix) -> Result<HullWeights> {
    if x.len() != vm.dim() {
        return Err(Error::DimensionMismatch {
            expected: vm.dim(),
            found: x.len(),
        });
    }
    let points: Vec<&[f64]> = vm.columns().iter().collect();
    let mut w = convex_combination(&points, x)?.ok_or(Error::OutsideHull)?;
    w.iter_mut().for_each(|v| *v = v.max(0.0));
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    let recon = vm.combine(&w)?;
    let scale = x.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    if linf_distance(&recon, x) > 1e-6 * scale {
        return Err(Error::OutsideHull);
    }
    HullWeights::from_columns(vm, &w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::{aggregate, aggregate_identical, AggregateOptions};
    use crate::testutil::example_battery;

    fn two_batteries() -> VertexMatrix {
        let spec = example_battery();
        aggregate(&[spec, spec], 4, 0).unwrap()
    }

    #[test]
    fn one_hot_returns_the_device_actions() {
        let vm = two_batteries();
        for c in 0..4 {
            let r = disaggregate(&HullWeights::one_hot(4, c), &vm).unwrap();
            for i in 0..2 {
                assert_eq!(r.schedules.get(i), vm.per_device().unwrap().profile(i, c));
            }
            assert_eq!(r.aggregate.as_slice(), vm.column(c));
        }
    }

    #[test]
    fn worked_two_battery_split() {
        let vm = two_batteries();
        // columns: (-2,0), (-2,2), (2,-2), (2,0), 0
        let w = HullWeights::new(vec![2.0 / 3.0, 0.0, 1.0 / 3.0, 0.0], 0.0, 1e-12).unwrap();
        let r = disaggregate(&w, &vm).unwrap();
        for i in 0..2 {
            let s = r.schedules.get(i);
            assert!((s[0] + 1.0 / 3.0).abs() < 1e-12 && (s[1] + 1.0 / 3.0).abs() < 1e-12);
        }
        let expected = vm.combine(&w.to_columns(true)).unwrap();
        assert!(linf_distance(&r.aggregate, &expected) < 1e-12);
        assert!(r.feasible_for(&[example_battery(); 2], 1e-9).unwrap());
    }

    #[test]
    fn zero_column_weight_idles_everyone() {
        let vm = two_batteries();
        let w = HullWeights::new(vec![0.0; 4], 1.0, 1e-12).unwrap();
        let r = disaggregate(&w, &vm).unwrap();
        assert!(r.schedules.as_flat().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn errors() {
        let vm = two_batteries();
        assert_eq!(
            disaggregate(
                &HullWeights::one_hot(4, 0),
                &vm.clone().without_per_device()
            ),
            Err(Error::MissingPerDevice)
        );
        assert!(matches!(
            disaggregate(&HullWeights::one_hot(3, 0), &vm),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(HullWeights::new(vec![0.5, 0.6], 0.0, 1e-9).is_err());
        assert!(HullWeights::new(vec![1.5, -0.5], 0.0, 1e-9).is_err());
    }

    #[test]
    fn recovers_weights_for_hull_points() {
        let vm = two_batteries();
        let w = weights_for_point(&[-2.0 / 3.0, -2.0 / 3.0], &vm).unwrap();
        let x = vm.combine(&w.to_columns(true)).unwrap();
        assert!(linf_distance(&x, &[-2.0 / 3.0, -2.0 / 3.0]) < 1e-9);
        let w = weights_for_point(vm.column(2), &vm).unwrap();
        let x = vm.combine(&w.to_columns(true)).unwrap();
        assert!(linf_distance(&x, vm.column(2)) < 1e-9);
        assert_eq!(
            weights_for_point(&[-1.0, -1.0], &vm),
            Err(Error::OutsideHull)
        );
    }

    #[test]
    fn shared_matrices_replicate() {
        let spec = example_battery();
        let vm = aggregate_identical(&spec, 3, 4, 0, AggregateOptions::default()).unwrap();
        let w = HullWeights::new(vec![0.25, 0.25, 0.25, 0.25], 0.0, 1e-12).unwrap();
        let r = disaggregate(&w, &vm).unwrap();
        assert_eq!(r.schedules.len(), 3);
        assert_eq!(r.schedules.get(0), r.schedules.get(2));
    }
}
