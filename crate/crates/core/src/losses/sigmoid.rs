use super::{SampleSet, SmoothLoss};
use crate::error::{invalid, Result};

/// Bound on `sup_t |s''(t)|` for `s(t) = 1/(1+e^t)`; the exact value is `1/(6√3) ≈ 0.0962`.
pub const SIGMOID_CURVATURE_BOUND: f64 = 0.1;

/// `s(t) = 1 / (1 + e^t)`, evaluated without overflow.
#[inline]
pub fn sigmoid(t: f64) -> f64 {
    if t > 0.0 {
        let e = libm::exp(-t);
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + libm::exp(t))
    }
}

/// `-s'(t) = e^t / (1 + e^t)²`, symmetric in `t`.
#[inline]
pub fn sigmoid_slope(t: f64) -> f64 {
    let e = libm::exp(-t.abs());
    let d = 1.0 + e;
    e / (d * d)
}

/// Nonconvex sigmoid loss `f_i(x) = 1 / (1 + exp(b_i a_iᵀx))` for labels `b_i ∈ {-1, +1}`.
#[derive(Debug, Clone)]
pub struct SigmoidLoss {
    samples: SampleSet,
    lipschitz: f64,
}

impl SigmoidLoss {
    pub fn new(samples: SampleSet) -> Result<Self> {
        if !samples.is_binary() {
            return Err(invalid("sigmoid loss needs labels in {-1, +1}"));
        }
        let lipschitz = SIGMOID_CURVATURE_BOUND * samples.max_row_norm_sq();
        Ok(SigmoidLoss { samples, lipschitz })
    }

    pub fn samples(&self) -> &SampleSet {
        &self.samples
    }
}

impl SmoothLoss for SigmoidLoss {
    fn dim(&self) -> usize {
        self.samples.dim()
    }

    fn num_samples(&self) -> usize {
        self.samples.len()
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn sample_value(&self, i: usize, x: &[f64]) -> f64 {
        sigmoid(self.samples.label(i) * self.samples.row_dot(i, x))
    }

    fn add_sample_grad(&self, i: usize, x: &[f64], weight: f64, out: &mut [f64]) {
        let b = self.samples.label(i);
        let t = b * self.samples.row_dot(i, x);
        self.samples.row_axpy(i, -weight * b * sigmoid_slope(t), out);
    }
}
