//! Multi-block linearized ADMM driven by a pluggable gradient estimator.
//!
//! Each iteration computes the estimate `v_k`, updates `y_1, ..., y_m` in
//! ascending order by proximal steps, takes the linearized x-step and
//! finishes with dual ascent on `z`.

mod params;
mod problem;
mod solver;
mod updates;

pub use params::{
    ceil_cbrt, ceil_sqrt, ceil_two_thirds, derive_hyperparams, resolve_schedule, DerivedSpectra, HyperParams,
    Schedule, SolverKind,
};
pub use problem::{Block, CompositeProblem, SPECTRAL_TOL};
pub use solver::{
    run, run_online, InitialRecord, Monitor, Silent, Trace, TraceHeader, TraceRecord, BATCH_STREAM, INIT_STREAM,
    OUTPUT_STREAM,
};
pub use updates::{update_x, update_y_block, update_z, x_optimality_residual, IterateState};
