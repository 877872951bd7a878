use alloc::vec::Vec;

use super::SmoothLoss;
use crate::error::{invalid, Result};

/// `f_i(x) = ½‖x − c_i‖²`; the full minimizer is the mean center. Used for testing.
#[derive(Debug, Clone)]
pub struct QuadraticLoss {
    dim: usize,
    centers: Vec<f64>,
}

impl QuadraticLoss {
    /// `centers` is a row-major `n × dim` matrix.
    pub fn new(dim: usize, centers: Vec<f64>) -> Result<Self> {
        if dim == 0 || centers.is_empty() || centers.len() % dim != 0 {
            return Err(invalid("centers must be a non-empty n × dim matrix"));
        }
        Ok(QuadraticLoss { dim, centers })
    }

    pub fn center(&self, i: usize) -> &[f64] {
        &self.centers[i * self.dim..(i + 1) * self.dim]
    }

    pub fn minimizer(&self) -> Vec<f64> {
        let n = self.num_samples() as f64;
        let mut m = alloc::vec![0.0; self.dim];
        for c in self.centers.chunks_exact(self.dim) {
            crate::linalg::axpy(1.0 / n, c, &mut m);
        }
        m
    }
}

impl SmoothLoss for QuadraticLoss {
    fn dim(&self) -> usize {
        self.dim
    }

    fn num_samples(&self) -> usize {
        self.centers.len() / self.dim
    }

    fn lipschitz(&self) -> f64 {
        1.0
    }

    fn sample_value(&self, i: usize, x: &[f64]) -> f64 {
        0.5 * crate::linalg::dist_sq(x, self.center(i))
    }

    fn add_sample_grad(&self, i: usize, x: &[f64], weight: f64, out: &mut [f64]) {
        for ((o, xi), ci) in out.iter_mut().zip(x).zip(self.center(i)) {
            *o += weight * (xi - ci);
        }
    }
}
