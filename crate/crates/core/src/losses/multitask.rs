use alloc::format;
use alloc::vec::Vec;

use super::{SampleSet, SmoothLoss};
use crate::error::{invalid, Result};

/// Smooth part of the sparse + low-rank multi-task objective.
///
/// The variable is `X ∈ R^{c×d}` stored row-major. Each sample contributes the
/// multinomial logistic loss plus the smooth remainder of the log-sum penalty,
/// `λ1 Σ_jk (κ(|X_jk|) − κ0 |X_jk|)` with `κ(t) = β log(1 + t/α)` and `κ0 = β/α`.
#[derive(Debug, Clone)]
pub struct MultitaskLoss {
    samples: SampleSet,
    classes: usize,
    lambda1: f64,
    alpha_ls: f64,
    beta_ls: f64,
    lipschitz: f64,
}

impl MultitaskLoss {
    pub fn new(samples: SampleSet, lambda1: f64, alpha_ls: f64, beta_ls: f64) -> Result<Self> {
        let classes = samples
            .num_classes()
            .ok_or_else(|| invalid("multi-task loss needs integer class labels in 1..=c"))?;
        if classes < 2 {
            return Err(invalid(format!("need at least 2 classes, found {classes}")));
        }
        if !(lambda1 >= 0.0) || !(alpha_ls > 0.0) || !(beta_ls > 0.0) {
            return Err(invalid("need lambda1 >= 0, alpha_ls > 0, beta_ls > 0"));
        }
        let lipschitz = 0.5 * samples.max_row_norm_sq() + lambda1 * beta_ls / (alpha_ls * alpha_ls);
        Ok(MultitaskLoss {
            samples,
            classes,
            lambda1,
            alpha_ls,
            beta_ls,
            lipschitz,
        })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn features(&self) -> usize {
        self.samples.dim()
    }

    pub fn samples(&self) -> &SampleSet {
        &self.samples
    }

    /// `κ0 = κ'(0) = β/α`
    pub fn kappa0(&self) -> f64 {
        self.beta_ls / self.alpha_ls
    }

    /// `λ1 Σ (κ(|X_jk|) − κ0 |X_jk|)`
    pub fn correction_value(&self, x: &[f64]) -> f64 {
        let k0 = self.kappa0();
        self.lambda1
            * x.iter()
                .map(|&t| {
                    let a = t.abs();
                    self.beta_ls * libm::log1p(a / self.alpha_ls) - k0 * a
                })
                .sum::<f64>()
    }

    /// `out += weight * ∇(correction)`; zero at `X_jk = 0`.
    pub fn add_correction_grad(&self, x: &[f64], weight: f64, out: &mut [f64]) {
        let scale = weight * self.lambda1 * self.beta_ls;
        let inv_alpha = 1.0 / self.alpha_ls;
        for (o, &t) in out.iter_mut().zip(x) {
            if t != 0.0 {
                *o += scale * t.signum() * (1.0 / (self.alpha_ls + t.abs()) - inv_alpha);
            }
        }
    }

    fn scores(&self, i: usize, x: &[f64]) -> Vec<f64> {
        let d = self.samples.dim();
        (0..self.classes)
            .map(|j| self.samples.row_dot(i, &x[j * d..(j + 1) * d]))
            .collect()
    }

    fn class_of(&self, i: usize) -> usize {
        self.samples.label(i) as usize - 1
    }
}

fn log_sum_exp(s: &[f64]) -> (f64, f64) {
    let m = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = s.iter().map(|v| libm::exp(v - m)).sum();
    (m + libm::log(z), m)
}

impl SmoothLoss for MultitaskLoss {
    fn dim(&self) -> usize {
        self.classes * self.samples.dim()
    }

    fn num_samples(&self) -> usize {
        self.samples.len()
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn sample_value(&self, i: usize, x: &[f64]) -> f64 {
        let s = self.scores(i, x);
        let (lse, _) = log_sum_exp(&s);
        lse - s[self.class_of(i)] + self.correction_value(x)
    }

    fn add_sample_grad(&self, i: usize, x: &[f64], weight: f64, out: &mut [f64]) {
        let d = self.samples.dim();
        let s = self.scores(i, x);
        let (lse, _) = log_sum_exp(&s);
        let yi = self.class_of(i);
        for (j, &sj) in s.iter().enumerate() {
            let p = libm::exp(sj - lse) - if j == yi { 1.0 } else { 0.0 };
            self.samples.row_axpy(i, weight * p, &mut out[j * d..(j + 1) * d]);
        }
        self.add_correction_grad(x, weight, out);
    }

    fn full_value(&self, x: &[f64]) -> f64 {
        let n = self.num_samples();
        let logistic: f64 = (0..n)
            .map(|i| {
                let s = self.scores(i, x);
                log_sum_exp(&s).0 - s[self.class_of(i)]
            })
            .sum::<f64>()
            / n as f64;
        logistic + self.correction_value(x)
    }
}
