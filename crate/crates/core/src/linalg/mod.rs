//! Vector kernels, structured linear operators, spectral extremes and seeded sampling.

mod operator;
mod rng;
mod spectral;
mod vecops;

pub use operator::LinearOperator;
pub use rng::{sample_minibatch, SeededRng};
pub use spectral::{spectral_extremes, spectral_extremes_capped, DEFAULT_EIGEN_CAP};
pub use vecops::*;
