//! Lifting extreme actions of `B(s0, s_min, p)` onto `B(s0, s_f, p)` when a
//! minimum final energy `s_f > s_min` is required.

use alloc::vec::Vec;

use crate::extreme::ExtremeAction;
use crate::num::{powi, scaled};
use crate::polytope::StorageSpec;
use crate::{Error, Result, DEFAULT_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectedAction {
    pub y_tilde: Vec<f64>,
    pub source: ExtremeAction,
    pub corrected: bool,
    /// 1-based index of the earliest period that was modified.
    pub correction_index: Option<usize>,
}

/// Per-device constants for the correction pass.
#[derive(Debug, Clone)]
pub(crate) struct FinalEnergy {
    /// `alpha^(d - t)` for period `t = 1..=d`.
    weights: Vec<f64>,
    decayed_s0: f64,
}

impl FinalEnergy {
    pub(crate) fn new(spec: &StorageSpec) -> Self {
        let d = spec.d;
        Self {
            weights: (0..d).map(|t| powi(spec.alpha, d - 1 - t)).collect(),
            decayed_s0: powi(spec.alpha, d) * spec.s0,
        }
    }

    /// Raises `y` in place until the final state of charge reaches `s_f`.
    ///
    /// Returns the 1-based earliest modified period, or `None` if `y`
    /// already meets the requirement.
    pub(crate) fn apply(&self, spec: &StorageSpec, y: &mut [f64]) -> Result<Option<usize>> {
        let d = y.len();
        let dt = spec.dt;
        let target = spec.s_f;
        let tol = scaled(DEFAULT_TOL, target);
        // Final SoC without the last period's contribution.
        let mut base = self.decayed_s0
            + y[..d - 1]
                .iter()
                .zip(&self.weights)
                .map(|(v, w)| w * v * dt)
                .sum::<f64>();
        if target <= base + y[d - 1] * dt + tol {
            return Ok(None);
        }
        let in_range = |v: f64| {
            v >= spec.x_min - scaled(DEFAULT_TOL, spec.x_min)
                && v <= spec.x_max + scaled(DEFAULT_TOL, spec.x_max)
        };
        let last_candidate = |base: f64| (target - base) / dt;

        let mut index = d;
        let candidate = last_candidate(base);
        if in_range(candidate) {
            y[d - 1] = candidate.clamp(spec.x_min, spec.x_max);
        }
        // SoC after each of the first d - 1 periods. Raising y[k] by delta
        // lowers every later headroom `s_max - S(tau)` by
        // alpha^(tau - k) * delta * dt, i.e. lowers `headroom * alpha^(d-1-tau)`
        // by `weights[k] * delta * dt` uniformly, so a running minimum of the
        // scaled headroom gives the largest admissible raise.
        let mut soc = Vec::with_capacity(d - 1);
        let mut s = spec.s0;
        for &v in &y[..d - 1] {
            s = spec.alpha * s + v * dt;
            soc.push(s);
        }
        let mut headroom = f64::INFINITY;
        let mut t = d - 1;
        while (base + y[d - 1] * dt - target).abs() > tol && t > 0 {
            let k = t - 1;
            headroom = headroom.min((spec.s_max - soc[k]) * self.weights[k]);
            let cap = (headroom / (self.weights[k] * dt)).max(0.0);
            let delta = (spec.x_max - y[k]).min(cap).max(0.0);
            if delta > 0.0 {
                base += self.weights[k] * delta * dt;
                headroom -= self.weights[k] * delta * dt;
                y[k] += delta;
                index = t;
            }
            let candidate = last_candidate(base);
            if in_range(candidate) {
                y[d - 1] = candidate.clamp(spec.x_min, spec.x_max);
            }
            t -= 1;
        }
        if (base + y[d - 1] * dt - target).abs() > tol {
            return Err(Error::InfeasibleTarget { target });
        }
        Ok(Some(index))
    }
}

/// Walks back from the last period, raising earlier periods to `x_max` until
/// the last period alone can top the battery up to exactly `s_f`.
///
/// A raise that would push a later state of charge above `s_max` is cut to
/// the remaining headroom.
///
/// Actions whose final energy already meets `s_f` are returned unchanged.
pub fn correct(spec: &StorageSpec, y: &ExtremeAction) -> Result<CorrectedAction> {
    spec.validate()?;
    if y.y.len() != spec.d {
        return Err(Error::DimensionMismatch {
            expected: spec.d,
            found: y.y.len(),
        });
    }
    let mut y_tilde = y.y.clone();
    let correction_index = FinalEnergy::new(spec).apply(spec, &mut y_tilde)?;
    Ok(CorrectedAction {
        y_tilde,
        source: y.clone(),
        corrected: correction_index.is_some(),
        correction_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extreme::{battery_vertex, SignVector};
    use crate::testutil::example_battery;
    use alloc::vec;

    fn action(y: Vec<f64>) -> ExtremeAction {
        ExtremeAction {
            j: SignVector::all_charge(y.len()),
            y,
            device_id: 0,
        }
    }

    #[test]
    fn walks_back_one_period() {
        let spec = StorageSpec {
            s_f: 1.5,
            ..example_battery()
        };
        let c = correct(&spec, &action(vec![-1.0, 0.0])).unwrap();
        assert_eq!(c.y_tilde, vec![1.0, -0.5]);
        assert!(c.corrected);
        assert_eq!(c.correction_index, Some(1));
        assert_eq!(spec.final_soc(&c.y_tilde), 1.5);
    }

    #[test]
    fn charged_enough_is_untouched() {
        let spec = StorageSpec {
            s_f: 1.5,
            ..example_battery()
        };
        let j = SignVector::new(vec![1, 1]).unwrap();
        let y = battery_vertex(&spec.relaxed(), &j).unwrap();
        assert_eq!(y.y, vec![1.0, 0.0]);
        let c = correct(&spec, &y).unwrap();
        assert_eq!(c.y_tilde, vec![1.0, 0.0]);
        assert_eq!(c.correction_index, None);
    }

    #[test]
    fn last_period_suffices() {
        let spec = StorageSpec {
            s_f: 1.5,
            ..example_battery()
        };
        let c = correct(&spec, &action(vec![1.0, -1.0])).unwrap();
        assert_eq!(c.y_tilde, vec![1.0, -0.5]);
        assert_eq!(c.correction_index, Some(2));
    }

    #[test]
    fn relaxed_target_is_untouched() {
        let spec = example_battery();
        for y in [vec![-1.0, 0.0], vec![1.0, -1.0], vec![-1.0, 1.0]] {
            let c = correct(&spec, &action(y.clone())).unwrap();
            assert!(!c.corrected);
            assert_eq!(c.y_tilde, y);
            assert_eq!(c.correction_index, None);
        }
    }

    #[test]
    fn raises_stop_at_capacity() {
        let spec = StorageSpec {
            alpha: 1.0,
            x_min: -1.0,
            x_max: 0.5,
            s_min: 0.0,
            s_max: 2.0,
            dt: 1.0,
            s0: 1.5,
            s_f: 2.0,
            d: 3,
        };
        let j = SignVector::new(vec![1, -1, -1]).unwrap();
        let y = battery_vertex(&spec.relaxed(), &j).unwrap();
        assert_eq!(y.y, vec![0.5, -1.0, -1.0]);
        let c = correct(&spec, &y).unwrap();
        assert_eq!(c.y_tilde, vec![0.5, 0.0, 0.0]);
        assert_eq!(c.correction_index, Some(2));
    }

    #[test]
    fn unreachable_target_is_an_error() {
        let spec = StorageSpec {
            x_max: 0.4,
            s0: 0.0,
            s_f: 1.0,
            ..example_battery()
        };
        assert_eq!(
            correct(&spec, &action(vec![0.0, 0.0])),
            Err(Error::InfeasibleTarget { target: 1.0 })
        );
    }
}
