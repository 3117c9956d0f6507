//! Dense two-phase primal simplex with bounded variables.
//!
//! Problems are `min c^T x` subject to rows `a^T x (<=, =, >=) b` and
//! per-variable bounds `l <= x <= u` (either side may be infinite). Variables
//! are shifted or split so every internal column lives in `[0, u]`, and
//! nonbasic columns sit at either bound. Artificial columns are never stored:
//! an artificial is a unit column while basic and is dropped once it leaves.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Pivot magnitude below which a tableau entry is treated as zero.
pub const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERACY_THRESHOLD: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub lower: f64,
    pub upper: f64,
}

impl Bound {
    pub const NONNEGATIVE: Bound = Bound {
        lower: 0.0,
        upper: f64::INFINITY,
    };
    pub const FREE: Bound = Bound {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };
}

#[derive(Debug, Clone, PartialEq)]
struct Row {
    coeffs: Vec<f64>,
    sense: Sense,
    rhs: f64,
}

/// `min c^T x` over dense rows and variable bounds. Variables default to
/// `x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<Row>,
    bounds: Vec<Bound>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        let bounds = vec![Bound::NONNEGATIVE; objective.len()];
        Self {
            objective,
            rows: Vec::new(),
            bounds,
        }
    }

    pub fn free_variables(mut self) -> Self {
        self.bounds.iter_mut().for_each(|b| *b = Bound::FREE);
        self
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.bounds[var] = Bound { lower, upper };
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) {
        self.rows.push(Row { coeffs, sense, rhs });
    }

    /// Adds a row given as `(index, coefficient)` pairs.
    pub fn add_sparse_row(&mut self, entries: &[(usize, f64)], sense: Sense, rhs: f64) {
        let mut coeffs = vec![0.0; self.num_vars()];
        for &(j, v) in entries {
            coeffs[j] += v;
        }
        self.add_row(coeffs, sense, rhs);
    }

    fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(
                "non-finite objective coefficient".into(),
            ));
        }
        for row in &self.rows {
            if row.coeffs.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.coeffs.len(),
                });
            }
            if row.coeffs.iter().any(|v| !v.is_finite()) || !row.rhs.is_finite() {
                return Err(Error::InvalidParameter(
                    "non-finite constraint entry".into(),
                ));
            }
        }
        for b in &self.bounds {
            if b.lower.is_nan()
                || b.upper.is_nan()
                || b.lower == f64::INFINITY
                || b.upper == f64::NEG_INFINITY
            {
                return Err(Error::InvalidParameter("invalid variable bound".into()));
            }
        }
        Ok(())
    }

    /// Largest violation of rows and bounds at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let v = match row.sense {
                Sense::Le => lhs - row.rhs,
                Sense::Ge => row.rhs - lhs,
                Sense::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (b, &v) in self.bounds.iter().zip(x) {
            worst = worst.max(b.lower - v).max(v - b.upper);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point (meaningful when `status == Optimal`).
    pub x: Vec<f64>,
    pub objective: f64,
    /// Sum of artificial values left at the end of phase 1.
    pub infeasibility: f64,
    pub iterations: usize,
}

/// How an original variable maps onto internal columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = offset + col`
    Shift { col: usize, offset: f64 },
    /// `x = offset - col`
    Mirror { col: usize, offset: f64 },
    /// `x = pos - neg`
    Split { pos: usize, neg: usize },
}

struct Tableau {
    rows: usize,
    cols: usize,
    t: Vec<f64>,
    beta: Vec<f64>,
    /// Column index, or `cols + r` for the artificial of row `r`.
    basis: Vec<usize>,
    upper: Vec<f64>,
    at_upper: Vec<bool>,
    basic_pos: Vec<Option<usize>>,
    reduced: Vec<f64>,
    objective: f64,
    artificial_upper: f64,
    iterations: usize,
    max_iterations: usize,
}

enum Step {
    Optimal,
    Unbounded,
    Continue { degenerate: bool },
}

impl Tableau {
    fn entry(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.cols + j]
    }

    fn basic_upper(&self, i: usize) -> f64 {
        let var = self.basis[i];
        if var >= self.cols {
            self.artificial_upper
        } else {
            self.upper[var]
        }
    }

    fn reset_costs(&mut self, costs: &[f64], artificial_cost: f64) {
        self.reduced.copy_from_slice(costs);
        self.objective = 0.0;
        for (j, &c) in costs.iter().enumerate() {
            if self.at_upper[j] {
                self.objective += c * self.upper[j];
            }
        }
        for i in 0..self.rows {
            let var = self.basis[i];
            let cb = if var >= self.cols {
                artificial_cost
            } else {
                costs[var]
            };
            if cb == 0.0 {
                continue;
            }
            self.objective += cb * self.beta[i];
            let row = &self.t[i * self.cols..(i + 1) * self.cols];
            for (r, &a) in self.reduced.iter_mut().zip(row) {
                *r -= cb * a;
            }
        }
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.cols {
            if self.basic_pos[j].is_some() || self.upper[j] <= 0.0 {
                continue;
            }
            let dj = self.reduced[j];
            let direction = if !self.at_upper[j] && dj < -COST_TOL {
                1.0
            } else if self.at_upper[j] && dj > COST_TOL {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, direction));
            }
            if dj.abs() > best_score {
                best_score = dj.abs();
                best = Some((j, direction));
            }
        }
        best
    }

    fn step(&mut self, bland: bool) -> Step {
        let Some((j, s)) = self.choose_entering(bland) else {
            return Step::Optimal;
        };
        let mut theta = self.upper[j];
        let mut leave: Option<(usize, bool)> = None;
        let mut leave_pivot = 0.0;
        for i in 0..self.rows {
            let a = s * self.entry(i, j);
            let (limit, to_upper) = if a > PIVOT_TOL {
                (self.beta[i] / a, false)
            } else if a < -PIVOT_TOL {
                let ub = self.basic_upper(i);
                if ub == f64::INFINITY {
                    continue;
                }
                ((ub - self.beta[i]) / -a, true)
            } else {
                continue;
            };
            let limit = limit.max(0.0);
            let better = if limit < theta - 1e-12 {
                true
            } else if limit <= theta + 1e-12 {
                match leave {
                    // Prefer a real pivot over a bound flip on ties.
                    None => true,
                    Some((r, _)) if bland => self.basis[i] < self.basis[r],
                    Some(_) => a.abs() > leave_pivot,
                }
            } else {
                false
            };
            if better {
                theta = limit;
                leave = Some((i, to_upper));
                leave_pivot = a.abs();
            }
        }
        if theta == f64::INFINITY {
            return Step::Unbounded;
        }
        self.iterations += 1;
        let dj = self.reduced[j];
        for i in 0..self.rows {
            let a = s * self.entry(i, j);
            if a != 0.0 {
                self.beta[i] -= a * theta;
            }
        }
        self.objective += dj * s * theta;
        let degenerate = theta <= 1e-12;
        match leave {
            None => {
                self.at_upper[j] = !self.at_upper[j];
            }
            Some((r, to_upper)) => {
                let entering_value = if s > 0.0 {
                    theta
                } else {
                    self.upper[j] - theta
                };
                let leaving = self.basis[r];
                if leaving < self.cols {
                    self.at_upper[leaving] = to_upper;
                    self.basic_pos[leaving] = None;
                }
                self.at_upper[j] = false;
                self.pivot(r, j);
                self.basis[r] = j;
                self.basic_pos[j] = Some(r);
                self.beta[r] = entering_value;
            }
        }
        Step::Continue { degenerate }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let cols = self.cols;
        let p = self.t[r * cols + j];
        let inv = 1.0 / p;
        for v in &mut self.t[r * cols..(r + 1) * cols] {
            *v *= inv;
        }
        let (before, rest) = self.t.split_at_mut(r * cols);
        let (pivot_row, after) = rest.split_at_mut(cols);
        for row in before
            .chunks_exact_mut(cols)
            .chain(after.chunks_exact_mut(cols))
        {
            let f = row[j];
            if f != 0.0 {
                for (v, &pv) in row.iter_mut().zip(pivot_row.iter()) {
                    *v -= f * pv;
                }
                row[j] = 0.0;
            }
        }
        let f = self.reduced[j];
        if f != 0.0 {
            for (v, &pv) in self.reduced.iter_mut().zip(pivot_row.iter()) {
                *v -= f * pv;
            }
            self.reduced[j] = 0.0;
        }
    }

    /// Runs pivots until optimal, unbounded or the iteration cap.
    fn run(&mut self) -> LpStatus {
        let mut streak = 0;
        let mut bland = false;
        loop {
            if self.iterations >= self.max_iterations {
                return LpStatus::IterationLimit;
            }
            match self.step(bland) {
                Step::Optimal => return LpStatus::Optimal,
                Step::Unbounded => return LpStatus::Unbounded,
                Step::Continue { degenerate } => {
                    streak = if degenerate { streak + 1 } else { 0 };
                    if streak > DEGENERACY_THRESHOLD {
                        bland = true;
                    }
                }
            }
        }
    }

    fn column_value(&self, j: usize) -> f64 {
        match self.basic_pos[j] {
            Some(i) => self.beta[i],
            None if self.at_upper[j] => self.upper[j],
            None => 0.0,
        }
    }
}

/// Solves `lp` with the two-phase bounded simplex.
///
/// Returns `Err` only for malformed programs; infeasibility, unboundedness
/// and the iteration cap are reported through [`LpSolution::status`].
pub fn simplex_solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.num_vars();

    // Map original variables onto nonnegative internal columns.
    let mut maps = Vec::with_capacity(n);
    let mut upper = Vec::new();
    for b in &lp.bounds {
        if b.lower > b.upper {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: vec![0.0; n],
                objective: f64::NAN,
                infeasibility: b.lower - b.upper,
                iterations: 0,
            });
        }
        if b.lower.is_finite() {
            maps.push(VarMap::Shift {
                col: upper.len(),
                offset: b.lower,
            });
            upper.push(b.upper - b.lower);
        } else if b.upper.is_finite() {
            maps.push(VarMap::Mirror {
                col: upper.len(),
                offset: b.upper,
            });
            upper.push(f64::INFINITY);
        } else {
            maps.push(VarMap::Split {
                pos: upper.len(),
                neg: upper.len() + 1,
            });
            upper.push(f64::INFINITY);
            upper.push(f64::INFINITY);
        }
    }
    let structural = upper.len();
    let slack_count = lp.rows.iter().filter(|r| r.sense != Sense::Eq).count();
    let cols = structural + slack_count;
    upper.resize(cols, f64::INFINITY);
    let m = lp.rows.len();

    let mut costs = vec![0.0; cols];
    for (map, &c) in maps.iter().zip(&lp.objective) {
        match *map {
            VarMap::Shift { col, .. } => costs[col] += c,
            VarMap::Mirror { col, .. } => costs[col] -= c,
            VarMap::Split { pos, neg } => {
                costs[pos] += c;
                costs[neg] -= c;
            }
        }
    }

    let mut t = vec![0.0; m * cols];
    let mut beta = vec![0.0; m];
    let mut basis = vec![0; m];
    let mut basic_pos = vec![None; cols];
    let mut slack = structural;
    let mut b_scale: f64 = 1.0;
    for (i, row) in lp.rows.iter().enumerate() {
        let dst = &mut t[i * cols..(i + 1) * cols];
        let mut rhs = row.rhs;
        for (map, &a) in maps.iter().zip(&row.coeffs) {
            if a == 0.0 {
                continue;
            }
            match *map {
                VarMap::Shift { col, offset } => {
                    dst[col] += a;
                    rhs -= a * offset;
                }
                VarMap::Mirror { col, offset } => {
                    dst[col] -= a;
                    rhs -= a * offset;
                }
                VarMap::Split { pos, neg } => {
                    dst[pos] += a;
                    dst[neg] -= a;
                }
            }
        }
        b_scale = b_scale.max(rhs.abs());
        let slack_col = match row.sense {
            Sense::Le => {
                dst[slack] = 1.0;
                slack += 1;
                Some(slack - 1)
            }
            Sense::Ge => {
                dst[slack] = -1.0;
                slack += 1;
                Some(slack - 1)
            }
            Sense::Eq => None,
        };
        let slack_usable = slack_col.is_some_and(|c| dst[c] * rhs >= 0.0);
        let sign = match slack_col {
            Some(c) if slack_usable => dst[c],
            _ if rhs < 0.0 => -1.0,
            _ => 1.0,
        };
        if sign < 0.0 {
            dst.iter_mut().for_each(|v| *v = -*v);
            rhs = -rhs;
        }
        beta[i] = rhs;
        match slack_col {
            Some(c) if slack_usable => {
                basis[i] = c;
                basic_pos[c] = Some(i);
            }
            _ => basis[i] = cols + i,
        }
    }

    let mut tab = Tableau {
        rows: m,
        cols,
        t,
        beta,
        basis,
        upper,
        at_upper: vec![false; cols],
        basic_pos,
        reduced: vec![0.0; cols],
        objective: 0.0,
        artificial_upper: f64::INFINITY,
        iterations: 0,
        max_iterations: 50_000 + 50 * (m + cols),
    };

    let needs_phase1 = tab.basis.iter().any(|&v| v >= cols);
    let mut infeasibility = 0.0;
    if needs_phase1 {
        tab.reset_costs(&vec![0.0; cols], 1.0);
        let status = tab.run();
        if status == LpStatus::IterationLimit {
            return Ok(finish(
                lp,
                &maps,
                &tab,
                LpStatus::IterationLimit,
                tab.objective,
            ));
        }
        infeasibility = tab
            .basis
            .iter()
            .zip(&tab.beta)
            .filter(|(&v, _)| v >= cols)
            .map(|(_, &b)| b.abs())
            .sum();
        if infeasibility > 1e-9 * b_scale * (1.0 + m as f64 / 100.0) {
            return Ok(finish(lp, &maps, &tab, LpStatus::Infeasible, infeasibility));
        }
        for (b, &v) in tab.beta.iter_mut().zip(&tab.basis) {
            if v >= cols {
                *b = 0.0;
            }
        }
        tab.artificial_upper = 0.0;
    }

    tab.reset_costs(&costs, 0.0);
    let status = tab.run();
    Ok(finish(lp, &maps, &tab, status, infeasibility))
}

fn finish(
    lp: &LinearProgram,
    maps: &[VarMap],
    tab: &Tableau,
    status: LpStatus,
    infeasibility: f64,
) -> LpSolution {
    let x: Vec<f64> = maps
        .iter()
        .map(|map| match *map {
            VarMap::Shift { col, offset } => offset + tab.column_value(col),
            VarMap::Mirror { col, offset } => offset - tab.column_value(col),
            VarMap::Split { pos, neg } => tab.column_value(pos) - tab.column_value(neg),
        })
        .collect();
    let objective = match status {
        LpStatus::Optimal => lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum(),
        LpStatus::Unbounded => f64::NEG_INFINITY,
        _ => f64::NAN,
    };
    LpSolution {
        status,
        x,
        objective,
        infeasibility,
        iterations: tab.iterations,
    }
}
