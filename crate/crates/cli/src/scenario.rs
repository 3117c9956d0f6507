//! Synthetic benchmark scenarios: battery parameters drawn from fixed
//! intervals, household demand and a day-ahead style price curve.

use flexhull_core::StorageSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Time step of generated batteries, in hours.
pub const DT_HOURS: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub specs: Vec<StorageSpec>,
    /// One demand profile (kW, length d) per household.
    pub demand: Vec<Vec<f64>>,
    /// Energy price per period (currency/kWh).
    pub prices: Vec<f64>,
    pub seed: u64,
    pub label: String,
}

impl Scenario {
    pub fn d(&self) -> usize {
        self.prices.len()
    }

    /// Total household demand per period.
    pub fn demand_sum(&self) -> Vec<f64> {
        let mut sum = vec![0.0; self.d()];
        for q in &self.demand {
            for (s, v) in sum.iter_mut().zip(q) {
                *s += v;
            }
        }
        sum
    }
}

/// Deterministic 64-bit mix of a base seed and a list of keys.
pub fn derive_seed(base: u64, keys: &[u64]) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    keys.iter()
        .fold(splitmix(base), |acc, &k| splitmix(acc ^ splitmix(k)))
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Batteries with `alpha = 1`, `dt = 0.25 h`, `s_min = 0`, `s_f = s0 / 2` and
/// `s_max in [10.5, 13.5]`, `s0 in [0, 10.5]`, `x_max in [4, 6]`,
/// `x_min in [-6, -4]`.
pub fn generate_specs(n: usize, d: usize, seed: u64) -> Vec<StorageSpec> {
    let mut rng = stream(seed, 1);
    (0..n)
        .map(|_| {
            let s_max = rng.random_range(10.5..=13.5);
            let s0 = rng.random_range(0.0..=10.5);
            let x_max = rng.random_range(4.0..=6.0);
            let x_min = -rng.random_range(4.0..=6.0);
            StorageSpec {
                alpha: 1.0,
                x_min,
                x_max,
                s_min: 0.0,
                s_max,
                dt: DT_HOURS,
                s0,
                s_f: s0 / 2.0,
                d,
            }
        })
        .collect()
}

fn bump(hour: f64, center: f64, width: f64) -> f64 {
    let z = (hour - center) / width;
    (-0.5 * z * z).exp()
}

/// Hour of day at the middle of period `t` when `d` periods span a day.
fn hour_of(t: usize, d: usize) -> f64 {
    24.0 * (t as f64 + 0.5) / d as f64
}

/// Household demand: a base load plus morning and evening bumps with
/// per-household jitter, clipped at zero.
pub fn synthetic_demand(households: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = stream(seed, 2);
    (0..households)
        .map(|_| {
            let base = rng.random_range(0.2..0.5);
            let morning = (rng.random_range(0.3..1.0), rng.random_range(6.0..9.0));
            let evening = (rng.random_range(0.6..1.5), rng.random_range(17.5..20.5));
            let width = rng.random_range(1.0..2.0);
            (0..d)
                .map(|t| {
                    let h = hour_of(t, d);
                    let q = base
                        + morning.0 * bump(h, morning.1, width)
                        + evening.0 * bump(h, evening.1, width)
                        + rng.random_range(-0.1..0.1);
                    q.max(0.0)
                })
                .collect()
        })
        .collect()
}

/// Two-peak price curve in roughly `[0.10, 0.40]` currency/kWh.
pub fn synthetic_prices(d: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, 3);
    (0..d)
        .map(|t| {
            let h = hour_of(t, d);
            let p = 0.12
                + 0.10 * bump(h, 8.0, 1.5)
                + 0.22 * bump(h, 19.0, 2.0)
                + rng.random_range(-0.02..0.02);
            p.clamp(0.10, 0.40)
        })
        .collect()
}

/// Scenario with one household per battery.
pub fn generate_scenario(n: usize, d: usize, seed: u64) -> Scenario {
    Scenario {
        specs: generate_specs(n, d, seed),
        demand: synthetic_demand(n, d, seed),
        prices: synthetic_prices(d, seed),
        seed,
        label: format!("synthetic-n{n}-d{d}-s{seed}"),
    }
}
