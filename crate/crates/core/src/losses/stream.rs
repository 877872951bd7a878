use alloc::vec::Vec;

use super::{sigmoid_slope, SampleSet, SmoothLoss};
use crate::error::{invalid, Result};
use crate::linalg::{axpy, dot, norm, SeededRng};

/// Source of i.i.d. samples `ζ` for the online setting, where only
/// minibatch averages of `∇f(x; ζ)` are available.
pub trait SampleStream {
    /// A drawn minibatch; it can be evaluated at several points.
    type Batch;

    fn dim(&self) -> usize;

    /// Draws `count` fresh samples.
    fn draw(&self, rng: &mut SeededRng, count: usize) -> Self::Batch;

    /// `out = mean over the batch of ∇f(x; ζ)`
    fn batch_grad_into(&self, batch: &Self::Batch, x: &[f64], out: &mut [f64]);

    /// Short description recorded in trace headers.
    fn describe(&self) -> &'static str;
}

/// Stream that resamples a finite loss uniformly with replacement.
#[derive(Debug, Clone, Copy)]
pub struct ResampledStream<'a, L> {
    loss: &'a L,
}

impl<'a, L: SmoothLoss> ResampledStream<'a, L> {
    pub fn new(loss: &'a L) -> Self {
        ResampledStream { loss }
    }
}

impl<L: SmoothLoss> SampleStream for ResampledStream<'_, L> {
    type Batch = Vec<usize>;

    fn dim(&self) -> usize {
        self.loss.dim()
    }

    fn draw(&self, rng: &mut SeededRng, count: usize) -> Vec<usize> {
        let n = self.loss.num_samples();
        (0..count).map(|_| rng.index(n)).collect()
    }

    fn batch_grad_into(&self, batch: &Vec<usize>, x: &[f64], out: &mut [f64]) {
        self.loss.minibatch_grad_into(x, batch, out)
    }

    fn describe(&self) -> &'static str {
        "resampled-finite-dataset"
    }
}

/// Parametric binary-classification stream for the sigmoid loss.
///
/// Features are standard Gaussian rows scaled to unit norm; labels are
/// `sign(aᵀ x_true + noise)` with Gaussian noise of the given standard deviation.
#[derive(Debug, Clone)]
pub struct SyntheticBinaryStream {
    x_true: Vec<f64>,
    noise_std: f64,
}

impl SyntheticBinaryStream {
    pub fn new(x_true: Vec<f64>, noise_std: f64) -> Result<Self> {
        if x_true.is_empty() || !(noise_std >= 0.0) {
            return Err(invalid("synthetic stream needs a non-empty x_true and noise_std >= 0"));
        }
        Ok(SyntheticBinaryStream { x_true, noise_std })
    }

    /// Draws a finite sample set from the same distribution.
    pub fn sample_set(&self, rng: &mut SeededRng, count: usize) -> Result<SampleSet> {
        let d = self.x_true.len();
        let mut features = Vec::with_capacity(count * d);
        let mut labels = Vec::with_capacity(count);
        for _ in 0..count {
            let (row, label) = self.draw_one(rng);
            features.extend_from_slice(&row);
            labels.push(label);
        }
        SampleSet::from_dense(d, &features, labels)
    }

    fn draw_one(&self, rng: &mut SeededRng) -> (Vec<f64>, f64) {
        let mut a = rng.normal_vec(self.x_true.len());
        let nrm = norm(&a);
        if nrm > 0.0 {
            a.iter_mut().for_each(|v| *v /= nrm);
        }
        let margin = dot(&a, &self.x_true) + self.noise_std * rng.standard_normal();
        (a, if margin >= 0.0 { 1.0 } else { -1.0 })
    }
}

impl SampleStream for SyntheticBinaryStream {
    /// Row-major features followed by labels.
    type Batch = (Vec<f64>, Vec<f64>);

    fn dim(&self) -> usize {
        self.x_true.len()
    }

    fn draw(&self, rng: &mut SeededRng, count: usize) -> Self::Batch {
        let d = self.x_true.len();
        let mut features = Vec::with_capacity(count * d);
        let mut labels = Vec::with_capacity(count);
        for _ in 0..count {
            let (row, label) = self.draw_one(rng);
            features.extend_from_slice(&row);
            labels.push(label);
        }
        (features, labels)
    }

    fn batch_grad_into(&self, batch: &Self::Batch, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let (features, labels) = batch;
        let w = 1.0 / labels.len() as f64;
        for (a, &b) in features.chunks_exact(x.len()).zip(labels) {
            let t = b * dot(a, x);
            axpy(-w * b * sigmoid_slope(t), a, out);
        }
    }

    fn describe(&self) -> &'static str {
        "synthetic-binary-generator"
    }
}
