//! Seeded synthetic datasets.

use serde::{Deserialize, Serialize};
use vradmm_core::linalg::SeededRng;
use vradmm_core::losses::SampleSet;

use crate::error::Result;

/// RNG stream reserved for data generation, apart from the solver streams.
pub const DATA_STREAM: u64 = 11;

/// Binary classification data with chain-correlated features.
///
/// Each row is a stationary AR(1) sequence `a_1 ~ N(0,1)`,
/// `a_{j+1} = φ a_j + √(1−φ²) ε_j`, so every feature has unit variance and
/// neighbours have correlation `φ`. Labels are `sign(aᵀx_true + noise·ε)`
/// with `x_true` sparse Gaussian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinarySpec {
    pub n: usize,
    pub d: usize,
    #[serde(default = "default_correlation")]
    pub correlation: f64,
    /// Probability that a coordinate of `x_true` is nonzero.
    #[serde(default = "default_density")]
    pub density: f64,
    #[serde(default = "default_noise")]
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_correlation() -> f64 {
    0.6
}
fn default_density() -> f64 {
    0.3
}
fn default_noise() -> f64 {
    0.1
}

impl BinarySpec {
    pub fn new(n: usize, d: usize, seed: u64) -> Self {
        BinarySpec {
            n,
            d,
            correlation: default_correlation(),
            density: default_density(),
            noise: default_noise(),
            seed,
        }
    }
}

/// Returns the samples and the planted `x_true`.
pub fn binary_dataset(spec: &BinarySpec) -> Result<(SampleSet, Vec<f64>)> {
    let mut rng = SeededRng::new(spec.seed, DATA_STREAM);
    let x_true = sparse_gaussian(&mut rng, spec.d, spec.density);
    let phi = spec.correlation;
    let innov = (1.0 - phi * phi).max(0.0).sqrt();
    let mut features = Vec::with_capacity(spec.n * spec.d);
    let mut labels = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let mut prev = rng.standard_normal();
        let start = features.len();
        features.push(prev);
        for _ in 1..spec.d {
            prev = phi * prev + innov * rng.standard_normal();
            features.push(prev);
        }
        let row = &features[start..];
        let margin: f64 = row.iter().zip(&x_true).map(|(a, b)| a * b).sum::<f64>() + spec.noise * rng.standard_normal();
        labels.push(if margin >= 0.0 { 1.0 } else { -1.0 });
    }
    Ok((SampleSet::from_dense(spec.d, &features, labels)?, x_true))
}

/// Multi-class data drawn from a softmax model with a planted weight matrix
/// `W = U Vᵀ + S` (`c × d`, rank-`rank` part plus a sparse part).
/// Features are standard Gaussian; labels are `1..=c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MulticlassSpec {
    pub n: usize,
    pub d: usize,
    pub classes: usize,
    #[serde(default = "default_rank")]
    pub rank: usize,
    #[serde(default = "default_sparse_density")]
    pub density: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_rank() -> usize {
    1
}
fn default_sparse_density() -> f64 {
    0.1
}

impl MulticlassSpec {
    pub fn new(n: usize, d: usize, classes: usize, seed: u64) -> Self {
        MulticlassSpec {
            n,
            d,
            classes,
            rank: default_rank(),
            density: default_sparse_density(),
            seed,
        }
    }
}

/// Returns the samples and the planted row-major `W`.
pub fn multiclass_dataset(spec: &MulticlassSpec) -> Result<(SampleSet, Vec<f64>)> {
    let (c, d) = (spec.classes, spec.d);
    let mut rng = SeededRng::new(spec.seed, DATA_STREAM);
    let u = rng.normal_vec(c * spec.rank);
    let v = rng.normal_vec(d * spec.rank);
    let s = sparse_gaussian(&mut rng, c * d, spec.density);
    let mut w = s;
    for j in 0..c {
        for k in 0..d {
            w[j * d + k] += (0..spec.rank).map(|r| u[j * spec.rank + r] * v[k * spec.rank + r]).sum::<f64>();
        }
    }
    let mut features = Vec::with_capacity(spec.n * d);
    let mut labels = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let a = rng.normal_vec(d);
        let scores: Vec<f64> = (0..c).map(|j| (0..d).map(|k| w[j * d + k] * a[k]).sum()).collect();
        let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let probs: Vec<f64> = scores.iter().map(|s| (s - m).exp()).collect();
        let total: f64 = probs.iter().sum();
        let mut u = rng.uniform() * total;
        let mut label = c;
        for (j, p) in probs.iter().enumerate() {
            if u < *p {
                label = j + 1;
                break;
            }
            u -= p;
        }
        labels.push(label as f64);
        features.extend(a);
    }
    Ok((SampleSet::from_dense(d, &features, labels)?, w))
}

fn sparse_gaussian(rng: &mut SeededRng, len: usize, density: f64) -> Vec<f64> {
    let mut x: Vec<f64> = (0..len)
        .map(|_| {
            let keep = rng.uniform() < density;
            let v = rng.standard_normal();
            if keep {
                v
            } else {
                0.0
            }
        })
        .collect();
    if x.iter().all(|v| *v == 0.0) && len > 0 {
        x[rng.index(len)] = 1.0;
    }
    x
}
