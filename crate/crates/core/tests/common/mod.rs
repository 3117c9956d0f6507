//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use flexhull_core::{battery_nonempty, battery_satisfies_assumptions, StorageSpec};
use rand::Rng;

const DT_CHOICES: [f64; 3] = [0.25, 0.5, 1.0];

/// Battery with `s_f = s_min` satisfying the structural assumptions.
pub fn assumption_spec<R: Rng>(rng: &mut R, d: usize, dt: f64) -> StorageSpec {
    loop {
        let decaying = rng.random_bool(0.3);
        let alpha = if decaying {
            rng.random_range(0.8..1.0)
        } else {
            1.0
        };
        let s_min = if decaying {
            0.0
        } else {
            rng.random_range(0.0..1.0)
        };
        let s_max = s_min + rng.random_range(0.5..5.0);
        let spec = StorageSpec {
            alpha,
            x_min: -rng.random_range(0.2..3.0),
            x_max: rng.random_range(0.2..3.0),
            s_min,
            s_max,
            dt,
            s0: rng.random_range(s_min..=s_max),
            s_f: s_min,
            d,
        };
        if battery_satisfies_assumptions(&spec) {
            return spec;
        }
    }
}

/// Nonempty battery with a final-energy requirement above `s_min`.
pub fn target_spec<R: Rng>(rng: &mut R, d: usize, dt: f64) -> StorageSpec {
    loop {
        let base = assumption_spec(rng, d, dt);
        let spec = StorageSpec {
            s_f: rng.random_range(base.s_min..=base.s_max),
            ..base
        };
        if spec.s_f > spec.s_min && battery_nonempty(&spec) {
            return spec;
        }
    }
}

pub fn random_dt<R: Rng>(rng: &mut R) -> f64 {
    DT_CHOICES[rng.random_range(0..DT_CHOICES.len())]
}

/// `n` devices on a common grid; `with_targets` mixes in `s_f > s_min`.
pub fn fleet<R: Rng>(rng: &mut R, n: usize, d: usize, with_targets: bool) -> Vec<StorageSpec> {
    let dt = random_dt(rng);
    (0..n)
        .map(|_| {
            if with_targets && rng.random_bool(0.5) {
                target_spec(rng, d, dt)
            } else {
                assumption_spec(rng, d, dt)
            }
        })
        .collect()
}

/// Random point of the probability simplex, sometimes sparse.
pub fn simplex_weights<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let sparse = rng.random_bool(0.3);
    let mut w: Vec<f64> = (0..k)
        .map(|_| {
            if sparse && rng.random_bool(0.7) {
                0.0
            } else {
                -rng.random_range(1e-12f64..1.0).ln()
            }
        })
        .collect();
    if w.iter().all(|&v| v == 0.0) {
        w[rng.random_range(0..k)] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}
