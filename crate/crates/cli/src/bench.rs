//! Benchmark matrix: per (n, d, repetition) cell, aggregate a scenario,
//! optimise over the hull, solve the exact problem where small enough and
//! report UPR.
//!
//! Deterministic outputs (`results.csv`, `results.json`, `summary.csv`,
//! `robustness.csv`) depend only on the config and seeds. Wall times go to
//! `timings.csv`.

use std::path::Path;
use std::time::Instant;

use flexhull_core::{
    aggregate_with, exact_optimum, min_over_hull, no_flex_value, sample_sign_vectors, upr,
    AggregateOptions, ObjectiveKind, ObjectiveSpec, VertexMatrix,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{thread_cap, BenchConfig, Objective};
use crate::data::{load_demand_csv, load_prices_csv, write_json, DataError};
use crate::scenario::{derive_seed, generate_scenario, Scenario};

/// One (cell, objective) outcome. Values are `None` when unavailable; the
/// reason, if any, is in `error`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub d: usize,
    pub g: usize,
    pub repetition: usize,
    pub seed: u64,
    pub objective: Objective,
    pub z_approx: Option<f64>,
    pub z_exact: Option<f64>,
    pub z_noflex: Option<f64>,
    pub upr_percent: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub n: usize,
    pub d: usize,
    pub repetition: usize,
    pub objective: Objective,
    pub t_aggregate_s: f64,
    pub t_opt_s: Option<f64>,
    pub t_exact_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: usize,
    pub d: usize,
    pub objective: Objective,
    pub runs: usize,
    pub upr_count: usize,
    pub upr_median: Option<f64>,
    pub upr_min: Option<f64>,
    pub upr_max: Option<f64>,
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessRow {
    pub n: usize,
    pub d: usize,
    pub g: usize,
    pub objective: Objective,
    pub redraws: usize,
    pub upr_count: usize,
    pub upr_min: Option<f64>,
    pub upr_median: Option<f64>,
    pub upr_max: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct BenchOutput {
    pub rows: Vec<BenchRow>,
    pub timings: Vec<Timing>,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    n: usize,
    d: usize,
    repetition: usize,
}

/// Objective with its exact optimum, or the reason it is unavailable.
type Prepared = (Objective, Result<(ObjectiveSpec, f64), String>);

const SIGN_STREAM: u64 = 0x5349_474e;

fn cell_seed(cfg: &BenchConfig, c: Cell) -> u64 {
    derive_seed(cfg.seed, &[c.n as u64, c.d as u64, c.repetition as u64])
}

/// Scenario for a cell, with demand and prices from CSV when configured.
fn scenario_for(cfg: &BenchConfig, c: Cell, seed: u64) -> Result<Scenario, DataError> {
    let mut s = generate_scenario(c.n, c.d, seed);
    if let Some(p) = &cfg.demand_csv {
        s.demand = load_demand_csv(p, c.d)?;
    }
    if let Some(p) = &cfg.prices_csv {
        s.prices = load_prices_csv(p, c.d)?;
    }
    Ok(s)
}

fn objective_spec(obj: Objective, s: &Scenario) -> flexhull_core::Result<ObjectiveSpec> {
    let dt = s.specs[0].dt;
    match obj.kind() {
        ObjectiveKind::Cost => ObjectiveSpec::cost(s.prices.clone(), s.demand_sum(), dt),
        ObjectiveKind::Peak => ObjectiveSpec::peak(s.demand_sum(), dt),
    }
}

fn aggregate_cell(
    cfg: &BenchConfig,
    s: &Scenario,
    g: usize,
    sign_seed: u64,
) -> flexhull_core::Result<VertexMatrix> {
    let signs = sample_sign_vectors(s.d(), g, sign_seed);
    aggregate_with(
        &s.specs,
        signs,
        AggregateOptions {
            retain_per_device: false,
            zero_column: cfg.zero_column,
        },
    )
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

fn run_cell(cfg: &BenchConfig, c: Cell) -> Vec<(BenchRow, Timing)> {
    let seed = cell_seed(cfg, c);
    let g_req = cfg.g.resolve(c.d);
    let row = |objective, g| BenchRow {
        n: c.n,
        d: c.d,
        g,
        repetition: c.repetition,
        seed,
        objective,
        z_approx: None,
        z_exact: None,
        z_noflex: None,
        upr_percent: None,
        error: None,
    };
    let timing = |objective, t_aggregate_s| Timing {
        n: c.n,
        d: c.d,
        repetition: c.repetition,
        objective,
        t_aggregate_s,
        t_opt_s: None,
        t_exact_s: None,
    };

    let scenario = match scenario_for(cfg, c, seed) {
        Ok(s) => s,
        Err(e) => {
            return cfg
                .objectives
                .iter()
                .map(|&o| {
                    let mut r = row(o, g_req);
                    r.error = Some(e.to_string());
                    (r, timing(o, 0.0))
                })
                .collect();
        }
    };
    let (vm, t_agg) =
        timed(|| aggregate_cell(cfg, &scenario, g_req, derive_seed(seed, &[SIGN_STREAM])));

    cfg.objectives
        .iter()
        .map(|&o| {
            let mut r = row(o, g_req);
            let mut t = timing(o, t_agg);
            let vm = match &vm {
                Ok(vm) => vm,
                Err(e) => {
                    r.error = Some(format!("aggregation: {e}"));
                    return (r, t);
                }
            };
            r.g = vm.sign_vectors().len();
            let obj = match objective_spec(o, &scenario) {
                Ok(obj) => obj,
                Err(e) => {
                    r.error = Some(format!("objective: {e}"));
                    return (r, t);
                }
            };
            r.z_noflex = Some(no_flex_value(&obj));
            let (za, t_opt) = timed(|| min_over_hull(vm, &obj));
            t.t_opt_s = Some(t_opt);
            match za {
                Ok(sol) => r.z_approx = Some(sol.value),
                Err(e) => {
                    r.error = Some(format!("hull optimisation: {e}"));
                    return (r, t);
                }
            }
            if c.n * c.d > cfg.exact_threshold {
                r.error = Some(format!(
                    "exact solve skipped: n*d = {} exceeds threshold {}",
                    c.n * c.d,
                    cfg.exact_threshold
                ));
                return (r, t);
            }
            let (ze, t_exact) = timed(|| exact_optimum(&scenario.specs, &obj));
            t.t_exact_s = Some(t_exact);
            match ze {
                Ok(ze) => r.z_exact = Some(ze),
                Err(e) => {
                    r.error = Some(format!("exact solve: {e}"));
                    return (r, t);
                }
            }
            match upr(
                r.z_approx.unwrap(),
                r.z_exact.unwrap(),
                r.z_noflex.unwrap(),
                cfg.tolerance,
            ) {
                Ok(u) => r.upr_percent = Some(u),
                Err(e) => r.error = Some(format!("upr: {e}")),
            }
            (r, t)
        })
        .collect()
}

fn cells(cfg: &BenchConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &(n, d) in &cfg.tuples {
        for repetition in 0..cfg.repetitions {
            out.push(Cell { n, d, repetition });
        }
    }
    out
}

/// Runs `f` on a pool capped by `FLEXHULL_THREADS`, or the global pool.
fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    match thread_cap().and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

fn row_key(r: &BenchRow) -> (usize, usize, Objective, usize) {
    (r.n, r.d, r.objective, r.repetition)
}

/// Runs every cell of the matrix. Failures are recorded per row; rows come
/// back sorted by (n, d, objective, repetition).
pub fn run_benchmark(cfg: &BenchConfig) -> BenchOutput {
    let cells = cells(cfg);
    let results: Vec<Vec<(BenchRow, Timing)>> =
        with_pool(|| cells.par_iter().map(|&c| run_cell(cfg, c)).collect());
    let mut pairs: Vec<(BenchRow, Timing)> = results.into_iter().flatten().collect();
    pairs.sort_by_key(|(r, _)| row_key(r));
    pairs.dedup_by_key(|(r, _)| row_key(r));
    let (rows, timings) = pairs.into_iter().unzip();
    BenchOutput { rows, timings }
}

fn median(sorted: &[f64]) -> Option<f64> {
    let m = sorted.len();
    match m {
        0 => None,
        _ if m % 2 == 1 => Some(sorted[m / 2]),
        _ => Some(0.5 * (sorted[m / 2 - 1] + sorted[m / 2])),
    }
}

fn stats(values: &mut [f64]) -> (Option<f64>, Option<f64>, Option<f64>) {
    values.sort_by(f64::total_cmp);
    (
        values.first().copied(),
        median(values),
        values.last().copied(),
    )
}

/// Median, min and max UPR per (n, d, objective) over repetitions.
pub fn summarize(rows: &[BenchRow]) -> Vec<SummaryRow> {
    let mut out: Vec<SummaryRow> = Vec::new();
    for group in rows.chunk_by(|a, b| (a.n, a.d, a.objective) == (b.n, b.d, b.objective)) {
        let mut uprs: Vec<f64> = group.iter().filter_map(|r| r.upr_percent).collect();
        let (upr_min, upr_median, upr_max) = stats(&mut uprs);
        out.push(SummaryRow {
            n: group[0].n,
            d: group[0].d,
            objective: group[0].objective,
            runs: group.len(),
            upr_count: uprs.len(),
            upr_median,
            upr_min,
            upr_max,
            errors: group
                .iter()
                .filter(|r| r.error.is_some() && r.upr_percent.is_none())
                .count(),
        });
    }
    out
}

/// Redraws the sign vectors `cfg.redraws` times on the repetition-0
/// scenario of each tuple and reports the spread of UPR.
pub fn run_robustness(cfg: &BenchConfig) -> Vec<RobustnessRow> {
    let mut rows: Vec<RobustnessRow> = with_pool(|| {
        cfg.tuples
            .par_iter()
            .flat_map_iter(|&(n, d)| robustness_cell(cfg, n, d))
            .collect()
    });
    rows.sort_by_key(|r| (r.n, r.d, r.objective));
    rows.dedup_by_key(|r| (r.n, r.d, r.objective));
    rows
}

fn robustness_cell(cfg: &BenchConfig, n: usize, d: usize) -> Vec<RobustnessRow> {
    let c = Cell {
        n,
        d,
        repetition: 0,
    };
    let seed = cell_seed(cfg, c);
    let g_req = cfg.g.resolve(d);
    let blank = |objective, error: String| RobustnessRow {
        n,
        d,
        g: g_req,
        objective,
        redraws: cfg.redraws,
        upr_count: 0,
        upr_min: None,
        upr_median: None,
        upr_max: None,
        error: Some(error),
    };
    let scenario = match scenario_for(cfg, c, seed) {
        Ok(s) => s,
        Err(e) => {
            return cfg
                .objectives
                .iter()
                .map(|&o| blank(o, e.to_string()))
                .collect()
        }
    };
    if n * d > cfg.exact_threshold {
        let msg = format!("exact solve skipped: n*d = {} exceeds threshold", n * d);
        return cfg
            .objectives
            .iter()
            .map(|&o| blank(o, msg.clone()))
            .collect();
    }
    let objectives: Vec<Prepared> = cfg
        .objectives
        .iter()
        .map(|&o| {
            let r = objective_spec(o, &scenario)
                .and_then(|obj| exact_optimum(&scenario.specs, &obj).map(|ze| (obj, ze)))
                .map_err(|e| e.to_string());
            (o, r)
        })
        .collect();
    let mut uprs: Vec<Vec<f64>> = vec![Vec::new(); objectives.len()];
    let mut errors: Vec<Option<String>> = vec![None; objectives.len()];
    let mut g_used = g_req;
    for k in 0..cfg.redraws {
        let vm = match aggregate_cell(
            cfg,
            &scenario,
            g_req,
            derive_seed(seed, &[SIGN_STREAM, k as u64]),
        ) {
            Ok(vm) => vm,
            Err(e) => {
                errors
                    .iter_mut()
                    .for_each(|s| *s = Some(format!("aggregation: {e}")));
                continue;
            }
        };
        g_used = vm.sign_vectors().len();
        for (idx, (_, prep)) in objectives.iter().enumerate() {
            let (obj, ze) = match prep {
                Ok(p) => p,
                Err(e) => {
                    errors[idx] = Some(e.clone());
                    continue;
                }
            };
            let res = min_over_hull(&vm, obj)
                .and_then(|sol| upr(sol.value, *ze, no_flex_value(obj), cfg.tolerance));
            match res {
                Ok(u) => uprs[idx].push(u),
                Err(e) => errors[idx] = Some(e.to_string()),
            }
        }
    }
    objectives
        .iter()
        .zip(uprs.iter_mut().zip(errors))
        .map(|((o, _), (u, error))| {
            let (upr_min, upr_median, upr_max) = stats(u);
            RobustnessRow {
                n,
                d,
                g: g_used,
                objective: *o,
                redraws: cfg.redraws,
                upr_count: u.len(),
                upr_min,
                upr_median,
                upr_max,
                error,
            }
        })
        .collect()
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), DataError> {
    let csv_err = |source| DataError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn ensure_dir(dir: &Path) -> Result<(), DataError> {
    std::fs::create_dir_all(dir).map_err(|source| DataError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

/// Writes `results.csv`, `results.json`, `summary.csv` and `timings.csv`.
pub fn write_outputs(dir: &Path, out: &BenchOutput) -> Result<(), DataError> {
    ensure_dir(dir)?;
    write_csv(&dir.join("results.csv"), &out.rows)?;
    write_json(&dir.join("results.json"), &out.rows)?;
    write_csv(&dir.join("summary.csv"), &summarize(&out.rows))?;
    write_csv(&dir.join("timings.csv"), &out.timings)
}

pub fn write_robustness(dir: &Path, rows: &[RobustnessRow]) -> Result<(), DataError> {
    ensure_dir(dir)?;
    write_csv(&dir.join("robustness.csv"), rows)?;
    write_json(&dir.join("robustness.json"), &rows)
}
