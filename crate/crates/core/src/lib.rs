//! Variance-reduced stochastic ADMM for nonconvex, nonsmooth composite problems
//!
//! ```text
//! min_{x, y_1..y_m}  f(x) + Σ_j g_j(y_j)   s.t.  A x + Σ_j B_j y_j = c
//! ```
//!
//! with `f` a smooth finite sum (or expectation) and `g_j` convex with cheap
//! proximal maps. The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod admm;
pub mod diagnostics;
pub mod error;
pub mod estimators;
pub mod linalg;
pub mod losses;
pub mod regularizers;

pub use error::{Error, Result};
