//! Escape probability `T(z, i)` of random orbits and its stationary-weighted
//! aggregate: Monte Carlo estimates, certified branch-tree intervals, the
//! one-step transition operator and raster sweeps.

mod monte_carlo;
mod operator;
mod sweep;
mod tree;

pub use monte_carlo::{monte_carlo_t, sample_escapes, ProbEstimate};
pub use operator::{markov_step, operator_iteration, radial_ramp, IterationOutcome, ReadPolicy, TransitionStencil};
pub use sweep::{aggregate, sweep_t, SweepMethod, SweepReport, SweepResult};
pub use tree::{
    some_branch_escapes, tree_bounds, tree_bounds_with_budget, ProbBounds, DEFAULT_DEPTH, DEFAULT_NODE_BUDGET,
};
