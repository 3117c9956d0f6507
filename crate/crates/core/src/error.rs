use alloc::string::String;

use crate::lp::LpStatus;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    /// The one-dimensional feasible interval at `step` (1-based) is empty.
    #[error("empty feasible interval at period {step}: [{lower}, {upper}]")]
    EmptyInterval { step: usize, lower: f64, upper: f64 },

    /// The correction loop ran out of periods without reaching the final SoC.
    #[error("infeasible target: final state of charge {target} cannot be reached")]
    InfeasibleTarget { target: f64 },

    #[error("point lies outside the convex hull of the vertex matrix")]
    OutsideHull,

    #[error("degenerate UPR baseline: no-flexibility and exact values coincide")]
    DegenerateBaseline,

    #[error("vertex matrix does not retain per-device vertices")]
    MissingPerDevice,

    #[error("combinatorial guard exceeded: {0}")]
    GuardExceeded(String),

    #[error("linear program not solved: {0:?}")]
    Solver(LpStatus),
}
