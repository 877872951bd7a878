//! Problem builders, dataset IO, experiment orchestration and trace output
//! for the `vradmm` solvers.

pub mod builders;
pub mod checks;
pub mod config;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod io;
pub mod synth;
pub mod trace;

pub use error::{BenchError, Result};
