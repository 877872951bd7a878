//! Smooth finite-sum losses `f(x) = (1/n) Σ f_i(x)` and streaming sample sources.

mod multitask;
mod quadratic;
mod samples;
mod sigmoid;
mod stream;

use alloc::vec;
use alloc::vec::Vec;

pub use multitask::MultitaskLoss;
pub use quadratic::QuadraticLoss;
pub use samples::SampleSet;
pub use sigmoid::{sigmoid, sigmoid_slope, SigmoidLoss, SIGMOID_CURVATURE_BOUND};
pub use stream::{ResampledStream, SampleStream, SyntheticBinaryStream};

use crate::error::{check_dim, invalid, Result};

/// A smooth, possibly nonconvex finite-sum loss with per-sample gradients.
pub trait SmoothLoss {
    /// Parameter dimension `d`.
    fn dim(&self) -> usize;

    /// Sample count `n`.
    fn num_samples(&self) -> usize;

    /// Upper estimate of the per-sample gradient Lipschitz constant.
    fn lipschitz(&self) -> f64;

    /// `f_i(x)`
    fn sample_value(&self, i: usize, x: &[f64]) -> f64;

    /// `out += weight * ∇f_i(x)`
    fn add_sample_grad(&self, i: usize, x: &[f64], weight: f64, out: &mut [f64]);

    /// `out = (1/|idx|) Σ_{i∈idx} ∇f_i(x)`; `idx` must be non-empty.
    fn minibatch_grad_into(&self, x: &[f64], idx: &[usize], out: &mut [f64]) {
        out.fill(0.0);
        let w = 1.0 / idx.len() as f64;
        for &i in idx {
            self.add_sample_grad(i, x, w, out);
        }
    }

    /// `out = ∇f(x)`
    fn full_grad_into(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let n = self.num_samples();
        let w = 1.0 / n as f64;
        for i in 0..n {
            self.add_sample_grad(i, x, w, out);
        }
    }

    fn full_grad(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.full_grad_into(x, &mut g);
        g
    }

    /// `f(x)`
    fn full_value(&self, x: &[f64]) -> f64 {
        let n = self.num_samples();
        (0..n).map(|i| self.sample_value(i, x)).sum::<f64>() / n as f64
    }

    /// Mean of `f_i(x)` over `idx`, validated.
    fn value_on(&self, x: &[f64], idx: &[usize]) -> Result<f64> {
        self.check_batch(x, idx)?;
        Ok(idx.iter().map(|&i| self.sample_value(i, x)).sum::<f64>() / idx.len() as f64)
    }

    /// Mean of `∇f_i(x)` over `idx`, validated.
    fn grad_on(&self, x: &[f64], idx: &[usize]) -> Result<Vec<f64>> {
        self.check_batch(x, idx)?;
        let mut g = vec![0.0; self.dim()];
        self.minibatch_grad_into(x, idx, &mut g);
        Ok(g)
    }

    #[doc(hidden)]
    fn check_batch(&self, x: &[f64], idx: &[usize]) -> Result<()> {
        check_dim(self.dim(), x.len())?;
        if idx.is_empty() {
            return Err(invalid("empty index set"));
        }
        if idx.iter().any(|&i| i >= self.num_samples()) {
            return Err(invalid("sample index out of range"));
        }
        Ok(())
    }
}

impl<L: SmoothLoss + ?Sized> SmoothLoss for &L {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn num_samples(&self) -> usize {
        (**self).num_samples()
    }
    fn lipschitz(&self) -> f64 {
        (**self).lipschitz()
    }
    fn sample_value(&self, i: usize, x: &[f64]) -> f64 {
        (**self).sample_value(i, x)
    }
    fn add_sample_grad(&self, i: usize, x: &[f64], weight: f64, out: &mut [f64]) {
        (**self).add_sample_grad(i, x, weight, out)
    }
}
