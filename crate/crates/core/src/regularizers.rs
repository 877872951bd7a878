//! Convex penalties `g_j` with scaled proximal maps and subgradient distances.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{check_dim, invalid, Error, Result};

/// Singular values below this fraction of the largest one count as zero.
pub const SVD_RANK_CUTOFF: f64 = 1e-10;

/// Convex, possibly nonsmooth regularizer.
#[derive(Debug, Clone, PartialEq)]
pub enum Regularizer {
    Zero,
    /// `λ‖y‖₁`
    L1 { lambda: f64 },
    /// `λ‖Y‖_*` on a row-major `rows × cols` matrix.
    Nuclear { lambda: f64, rows: usize, cols: usize },
}

impl Regularizer {
    pub fn l1(lambda: f64) -> Result<Self> {
        check_weight(lambda)?;
        Ok(Regularizer::L1 { lambda })
    }

    pub fn nuclear(lambda: f64, rows: usize, cols: usize) -> Result<Self> {
        check_weight(lambda)?;
        if rows == 0 || cols == 0 {
            return Err(invalid("nuclear norm needs positive matrix dimensions"));
        }
        Ok(Regularizer::Nuclear { lambda, rows, cols })
    }

    pub fn weight(&self) -> f64 {
        match self {
            Regularizer::Zero => 0.0,
            Regularizer::L1 { lambda } | Regularizer::Nuclear { lambda, .. } => *lambda,
        }
    }

    /// `argmin_y (r/2)‖y − w‖² + g(y)`
    pub fn prox(&self, w: &[f64], r: f64) -> Result<Vec<f64>> {
        if !(r > 0.0) {
            return Err(invalid(format!("prox scale must be positive, got {r}")));
        }
        match *self {
            Regularizer::Zero => Ok(w.to_vec()),
            Regularizer::L1 { lambda } => {
                let thr = lambda / r;
                Ok(w.iter().map(|&v| soft_threshold(v, thr)).collect())
            }
            Regularizer::Nuclear { lambda, rows, cols } => {
                check_dim(rows * cols, w.len())?;
                if lambda == 0.0 {
                    return Ok(w.to_vec());
                }
                let svd = DMatrix::from_row_slice(rows, cols, w).svd(true, true);
                let u = svd.u.as_ref().expect("left singular vectors requested");
                let vt = svd.v_t.as_ref().expect("right singular vectors requested");
                let thr = lambda / r;
                let shrunk = svd.singular_values.map(|s| (s - thr).max(0.0));
                let y = u * DMatrix::from_diagonal(&shrunk) * vt;
                Ok(row_major(&y))
            }
        }
    }

    pub fn value(&self, y: &[f64]) -> Result<f64> {
        match *self {
            Regularizer::Zero => Ok(0.0),
            Regularizer::L1 { lambda } => Ok(lambda * y.iter().map(|v| v.abs()).sum::<f64>()),
            Regularizer::Nuclear { lambda, rows, cols } => {
                check_dim(rows * cols, y.len())?;
                if lambda == 0.0 {
                    return Ok(0.0);
                }
                let s = DMatrix::from_row_slice(rows, cols, y).singular_values();
                Ok(lambda * s.sum())
            }
        }
    }

    /// `dist(t, ∂g(y))²`, i.e. the squared distance from 0 to `∂g(y) − t`.
    pub fn min_subgrad_dist_sq(&self, y: &[f64], t: &[f64]) -> Result<f64> {
        check_dim(y.len(), t.len())?;
        match *self {
            Regularizer::Zero => Ok(t.iter().map(|v| v * v).sum()),
            Regularizer::L1 { lambda } => Ok(y
                .iter()
                .zip(t)
                .map(|(&yi, &ti)| {
                    if yi != 0.0 {
                        let d = lambda * yi.signum() - ti;
                        d * d
                    } else {
                        let d = (ti.abs() - lambda).max(0.0);
                        d * d
                    }
                })
                .sum()),
            Regularizer::Nuclear { lambda, rows, cols } => {
                check_dim(rows * cols, y.len())?;
                Ok(nuclear_subgrad_dist_sq(lambda, rows, cols, y, t))
            }
        }
    }
}

fn check_weight(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("regularizer weight must be >= 0, got {lambda}")))
    }
}

#[inline]
pub fn soft_threshold(v: f64, thr: f64) -> f64 {
    if v > thr {
        v - thr
    } else if v < -thr {
        v + thr
    } else {
        0.0
    }
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

// ∂(λ‖Y‖_*) = λ(U Vᵀ + W), UᵀW = 0, WV = 0, ‖W‖₂ ≤ 1, with U, V the singular
// vectors of the nonzero singular values. The distance splits over the four
// blocks of T in the (U, U⊥) × (V, V⊥) bases.
fn nuclear_subgrad_dist_sq(lambda: f64, rows: usize, cols: usize, y: &[f64], t: &[f64]) -> f64 {
    let ym = DMatrix::from_row_slice(rows, cols, y);
    let tm = DMatrix::from_row_slice(rows, cols, t);
    let svd = ym.svd(true, true);
    let u_full = svd.u.as_ref().expect("left singular vectors requested");
    let vt_full = svd.v_t.as_ref().expect("right singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| smax > 0.0 && s > SVD_RANK_CUTOFF * smax)
        .map(|(i, _)| i)
        .collect();
    let r = keep.len();
    let u = DMatrix::from_fn(rows, r, |i, k| u_full[(i, keep[k])]);
    let v = DMatrix::from_fn(cols, r, |j, k| vt_full[(keep[k], j)]);

    let pu = &u * u.transpose();
    let pv = &v * v.transpose();
    let qu = DMatrix::<f64>::identity(rows, rows) - &pu;
    let qv = DMatrix::<f64>::identity(cols, cols) - &pv;

    let core = u.transpose() * &tm * &v - DMatrix::<f64>::identity(r, r) * lambda;
    let mixed_a = &pu * &tm * &qv;
    let mixed_b = &qu * &tm * &pv;
    let perp = &qu * &tm * &qv;
    let clip: f64 = perp
        .singular_values()
        .iter()
        .map(|&s| {
            let e = (s - lambda).max(0.0);
            e * e
        })
        .sum();
    core.norm_squared() + mixed_a.norm_squared() + mixed_b.norm_squared() + clip
}
