//! Vertex-based inner approximation of the aggregate flexibility of energy
//! storage fleets.
//!
//! Each device is a polytope in power space (one coordinate per time
//! period). Summing per-device *extreme actions* over a common sign vector
//! gives vertices of the exact Minkowski sum, so their convex hull is an inner
//! approximation that can be optimized over and disaggregated without solving
//! any per-device problem.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, scenario
//! generation and the benchmark CLI live in the `flexhull-cli` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod aggregation;
pub mod correction;
pub mod disaggregation;
mod error;
pub mod extreme;
pub mod geometry;
pub mod lp;
mod num;
pub mod optimization;
pub mod polytope;
#[cfg(test)]
mod testutil;

pub use aggregation::{
    aggregate, aggregate_identical, aggregate_with, sample_sign_vectors, AggregateOptions,
    DeviceVertices, Fleet, Profiles, VertexMatrix,
};
pub use correction::{correct, CorrectedAction};
pub use disaggregation::{disaggregate, weights_for_point, DisaggregationResult, HullWeights};
pub use error::{Error, Result};
pub use extreme::{battery_vertex, extreme_action_generic, ExtremeAction, SignVector};
pub use geometry::{
    convex_independent, enumerate_vertices, is_vertex_of_hull, minkowski_vertex_candidates,
    VertexSet,
};
pub use lp::{simplex_solve, Bound, LinearProgram, LpSolution, LpStatus, Sense};
pub use optimization::{
    convex_combination, decompose_into_devices, exact_optimum, min_cost_over_hull, min_over_hull,
    min_peak_over_hull, no_flex_value, upr, HullSolution, ObjectiveKind, ObjectiveSpec,
};
pub use polytope::{
    battery_nonempty, battery_polytope, battery_satisfies_assumptions, contains,
    falsify_assumptions, project_prefix, simulate_soc, AssumptionViolation, HPolytope, StorageSpec,
};

/// Default absolute-plus-relative tolerance for membership and equality tests.
pub const DEFAULT_TOL: f64 = 1e-9;
