//! Optimality measures and convergence-theory quantities evaluated along a run.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::admm::{CompositeProblem, DerivedSpectra, IterateState, SolverKind};
use crate::error::{check_dim, invalid, Result};
use crate::linalg::{dot, norm_sq};
use crate::losses::SmoothLoss;

/// `L_ρ = f(x) + Σ g_j(y_j) − ⟨z, res⟩ + (ρ/2)‖res‖²` with `res = Ax + ΣB_j y_j − c`.
pub fn augmented_lagrangian<L: SmoothLoss>(problem: &CompositeProblem<L>, state: &IterateState, rho: f64) -> Result<f64> {
    state.check(problem)?;
    let res = problem.residual(&state.x, &state.y);
    Ok(problem.objective(&state.x, &state.y)? - dot(&state.z, &res) + 0.5 * rho * norm_sq(&res))
}

/// Squared distance from zero to the subdifferential of the Lagrangian, by part.
#[derive(Debug, Clone, PartialEq)]
pub struct StationarityReport {
    /// `‖Aᵀz − ∇f(x)‖²`
    pub grad_block_sq: f64,
    /// `dist(B_jᵀz, ∂g_j(y_j))²` per block.
    pub y_block_sq: Vec<f64>,
    /// `‖Ax + ΣB_j y_j − c‖²`
    pub feasibility_sq: f64,
    pub total_sq: f64,
}

/// Exact stationarity measure; needs the full gradient of a finite-sum loss.
pub fn stationarity_sq<L: SmoothLoss>(problem: &CompositeProblem<L>, state: &IterateState) -> Result<StationarityReport> {
    state.check(problem)?;
    let mut g = problem.a().apply_transpose(&state.z)?;
    let grad = problem.loss().full_grad(&state.x);
    for (gi, fi) in g.iter_mut().zip(&grad) {
        *gi -= fi;
    }
    let grad_block_sq = norm_sq(&g);
    let y_block_sq = problem
        .blocks()
        .iter()
        .zip(&state.y)
        .map(|(blk, yj)| {
            let t = blk.op.apply_transpose(&state.z)?;
            blk.reg.min_subgrad_dist_sq(yj, &t)
        })
        .collect::<Result<Vec<_>>>()?;
    let feasibility_sq = norm_sq(&problem.residual(&state.x, &state.y));
    let total_sq = grad_block_sq + y_block_sq.iter().sum::<f64>() + feasibility_sq;
    Ok(StationarityReport {
        grad_block_sq,
        y_block_sq,
        feasibility_sq,
        total_sq,
    })
}

/// Squared step lengths around iteration `k` needed by `θ_k`.
#[derive(Debug, Clone, PartialEq)]
pub enum ThetaWindow<'a> {
    /// `period_steps_sq` holds `‖x_{i+1} − x_i‖²` for `i = q⌊k/q⌋ ..= k`.
    Spider {
        next_step_sq: f64,
        prev_step_sq: f64,
        period_steps_sq: &'a [f64],
        q: usize,
        y_step_sq: f64,
    },
    /// Distances to the current snapshot `x̃`.
    Svrg {
        next_step_sq: f64,
        prev_step_sq: f64,
        snapshot_dist_sq: f64,
        prev_snapshot_dist_sq: f64,
        b: usize,
        y_step_sq: f64,
    },
    /// Table distances `(1/n)Σ_i ‖x_t − u_i^t‖²` at `t` and `t − 1`.
    Saga {
        next_step_sq: f64,
        prev_step_sq: f64,
        table_dist_sq: f64,
        prev_table_dist_sq: f64,
        b: usize,
        y_step_sq: f64,
    },
}

/// Stationarity surrogate `θ_k`.
pub fn theta_surrogate(window: &ThetaWindow<'_>) -> Result<f64> {
    match *window {
        ThetaWindow::Spider {
            next_step_sq,
            prev_step_sq,
            period_steps_sq,
            q,
            y_step_sq,
        } => {
            if q == 0 {
                return Err(invalid("refresh period must be positive"));
            }
            if period_steps_sq.is_empty() || period_steps_sq.len() > q {
                return Err(invalid(format!(
                    "period window must hold 1..={q} steps, got {}",
                    period_steps_sq.len()
                )));
            }
            let period: f64 = period_steps_sq.iter().sum();
            Ok(next_step_sq + prev_step_sq + period / q as f64 + y_step_sq)
        }
        ThetaWindow::Svrg {
            next_step_sq,
            prev_step_sq,
            snapshot_dist_sq,
            prev_snapshot_dist_sq,
            b,
            y_step_sq,
        } => {
            if b == 0 {
                return Err(invalid("minibatch size must be positive"));
            }
            Ok(next_step_sq + prev_step_sq + (snapshot_dist_sq + prev_snapshot_dist_sq) / b as f64 + y_step_sq)
        }
        ThetaWindow::Saga {
            next_step_sq,
            prev_step_sq,
            table_dist_sq,
            prev_table_dist_sq,
            b,
            y_step_sq,
        } => {
            if b == 0 {
                return Err(invalid("minibatch size must be positive"));
            }
            Ok(next_step_sq + prev_step_sq + (table_dist_sq + prev_table_dist_sq) / b as f64 + y_step_sq)
        }
    }
}

/// Scalars entering the Lyapunov coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovConstants {
    pub lipschitz: f64,
    pub sigma_a_min: f64,
    pub sigma_g_max: f64,
    pub rho: f64,
    pub eta: f64,
    /// `b` (online: `b₂`).
    pub batch: f64,
    /// 1 for the standard coefficients, `κ_A` for the weighted variant.
    pub kappa_a: f64,
}

impl LyapunovConstants {
    pub fn new(spectra: &DerivedSpectra, batch: usize, kappa_weighted: bool) -> Self {
        LyapunovConstants {
            lipschitz: spectra.lipschitz,
            sigma_a_min: spectra.sigma_a_min,
            sigma_g_max: spectra.sigma_g_max(),
            rho: spectra.rho,
            eta: spectra.eta,
            batch: batch as f64,
            kappa_a: if kappa_weighted { spectra.kappa_a } else { 1.0 },
        }
    }

    /// Coefficient of `‖x_k − x_{k−1}‖²`.
    pub fn step_coefficient(&self) -> f64 {
        let (l, s, rho) = (self.lipschitz, self.sigma_a_min, self.rho);
        9.0 * l * l / (s * rho) + 3.0 * self.kappa_a * self.sigma_g_max * self.sigma_g_max / (s * self.eta * self.eta * rho)
    }

    /// SPIDER coefficient of the in-period path length.
    pub fn period_coefficient(&self) -> f64 {
        2.0 * self.kappa_a * self.lipschitz * self.lipschitz / (self.sigma_a_min * self.rho * self.batch)
    }

    /// SVRG/SAGA coefficient of the lagged snapshot/table distance.
    pub fn lag_coefficient(&self) -> f64 {
        9.0 * self.lipschitz * self.lipschitz / (self.sigma_a_min * self.rho * self.batch)
    }

    /// Constant term of the `c_t` recursions, `18L²/(σ^A_min ρ b) + L/b`.
    pub fn c_increment(&self) -> f64 {
        18.0 * self.lipschitz * self.lipschitz / (self.sigma_a_min * self.rho * self.batch) + self.lipschitz / self.batch
    }
}

/// Per-iteration inputs of the Lyapunov functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LyapunovWindow {
    /// `R_k` (and `Φ_k` with `b₂`): `period_sum_sq = Σ_{i=q⌊k/q⌋}^{k−1} ‖x_{i+1} − x_i‖²`.
    Spider {
        aug_lagrangian: f64,
        last_step_sq: f64,
        period_sum_sq: f64,
    },
    /// `Γ^s_t`
    Svrg {
        aug_lagrangian: f64,
        last_step_sq: f64,
        prev_snapshot_dist_sq: f64,
        snapshot_dist_sq: f64,
        c_t: f64,
    },
    /// `Ω_t`
    Saga {
        aug_lagrangian: f64,
        last_step_sq: f64,
        prev_table_dist_sq: f64,
        table_dist_sq: f64,
        c_t: f64,
    },
}

pub fn lyapunov_value(kind: SolverKind, window: &LyapunovWindow, consts: &LyapunovConstants) -> Result<f64> {
    match (kind, *window) {
        (
            SolverKind::Spider | SolverKind::SpiderOnline | SolverKind::Deterministic,
            LyapunovWindow::Spider {
                aug_lagrangian,
                last_step_sq,
                period_sum_sq,
            },
        ) => Ok(aug_lagrangian + consts.step_coefficient() * last_step_sq + consts.period_coefficient() * period_sum_sq),
        (
            SolverKind::Svrg,
            LyapunovWindow::Svrg {
                aug_lagrangian,
                last_step_sq,
                prev_snapshot_dist_sq,
                snapshot_dist_sq,
                c_t,
            },
        ) => Ok(aug_lagrangian
            + consts.step_coefficient() * last_step_sq
            + consts.lag_coefficient() * prev_snapshot_dist_sq
            + c_t * snapshot_dist_sq),
        (
            SolverKind::Saga,
            LyapunovWindow::Saga {
                aug_lagrangian,
                last_step_sq,
                prev_table_dist_sq,
                table_dist_sq,
                c_t,
            },
        ) => Ok(aug_lagrangian
            + consts.step_coefficient() * last_step_sq
            + consts.lag_coefficient() * prev_table_dist_sq
            + c_t * table_dist_sq),
        (kind, w) => Err(invalid(format!("{kind} has no Lyapunov function of the form {w:?}"))),
    }
}

/// SVRG `c_t`, `t = 0..=M+1`: `c_{M+1} = 0`, `c_t = k0 + (1 + 1/M) c_{t+1}`.
pub fn svrg_c_schedule(k0: f64, epoch_len: usize) -> Vec<f64> {
    let beta = 1.0 / epoch_len as f64;
    let mut c = vec![0.0; epoch_len + 2];
    for t in (0..=epoch_len).rev() {
        c[t] = k0 + (1.0 + beta) * c[t + 1];
    }
    c
}

/// SAGA `β = b/(4n)`.
pub fn saga_beta(n: usize, b: usize) -> f64 {
    b as f64 / (4.0 * n as f64)
}

/// SAGA `c_t`, `t = 0..=T`: `c_T = 0`, `c_t = k0 + (1 − p)(1 + β) c_{t+1}`.
pub fn saga_c_schedule(k0: f64, p: f64, beta: f64, horizon: usize) -> Vec<f64> {
    let mut c = vec![0.0; horizon + 1];
    for t in (0..horizon).rev() {
        c[t] = k0 + (1.0 - p) * (1.0 + beta) * c[t + 1];
    }
    c
}

/// Constants bounding the stationarity measure by `ν_max θ_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuConstants {
    pub nu1: f64,
    pub nu2: f64,
    pub nu3: f64,
}

impl NuConstants {
    pub fn max(&self) -> f64 {
        self.nu1.max(self.nu2).max(self.nu3)
    }
}

pub fn nu_constants(kind: SolverKind, spectra: &DerivedSpectra) -> NuConstants {
    let m = spectra.r_blocks.len() as f64;
    let (rho, eta, l) = (spectra.rho, spectra.eta, spectra.lipschitz);
    let (sb, sa) = (spectra.sigma_b_max, spectra.sigma_a_max);
    let sh = spectra.sigma_h_max();
    let sg = spectra.sigma_g_max();
    let smin = spectra.sigma_a_min;
    let nu1 = m * (rho * rho * sb * sa + rho * rho * sb * sb + sh * sh);
    let nu2 = 3.0 * (l * l + sg * sg / (eta * eta));
    let lead = match kind {
        SolverKind::Svrg | SolverKind::Saga => 9.0,
        _ => 18.0,
    };
    let nu3 = lead * l * l / (smin * rho * rho) + 3.0 * sg * sg / (smin * eta * eta * rho * rho);
    NuConstants { nu1, nu2, nu3 }
}

/// `w = 12δ² max{1, 6/(σ^A_min ρ²)}` from a gradient-norm estimate `δ`.
pub fn online_floor_estimate(delta: f64, sigma_a_min: f64, rho: f64) -> f64 {
    12.0 * delta * delta * f64::max(1.0, 6.0 / (sigma_a_min * rho * rho))
}

/// Central-difference check of `∇f`; returns `max_i |fd_i − g_i| / max(‖g‖_∞, 1e-12)`.
pub fn finite_diff_check<L: SmoothLoss>(loss: &L, x: &[f64], h: f64) -> Result<f64> {
    check_dim(loss.dim(), x.len())?;
    if !(h > 0.0) {
        return Err(invalid(format!("step must be positive, got {h}")));
    }
    let g = loss.full_grad(x);
    let scale = g.iter().fold(1e-12_f64, |m, v| m.max(v.abs()));
    let mut xp = x.to_vec();
    let mut worst = 0.0_f64;
    for i in 0..x.len() {
        xp[i] = x[i] + h;
        let fp = loss.full_value(&xp);
        xp[i] = x[i] - h;
        let fm = loss.full_value(&xp);
        xp[i] = x[i];
        let fd = (fp - fm) / (2.0 * h);
        worst = worst.max((fd - g[i]).abs() / scale);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_hand_values() {
        let w = ThetaWindow::Spider {
            next_step_sq: 1.0,
            prev_step_sq: 1.0,
            period_steps_sq: &[1.0],
            q: 1,
            y_step_sq: 0.0,
        };
        assert_eq!(theta_surrogate(&w).unwrap(), 3.0);
        let w = ThetaWindow::Spider {
            next_step_sq: 0.0,
            prev_step_sq: 0.0,
            period_steps_sq: &[0.0, 0.0],
            q: 4,
            y_step_sq: 0.0,
        };
        assert_eq!(theta_surrogate(&w).unwrap(), 0.0);
        let bad = ThetaWindow::Spider {
            next_step_sq: 0.0,
            prev_step_sq: 0.0,
            period_steps_sq: &[],
            q: 2,
            y_step_sq: 0.0,
        };
        assert!(theta_surrogate(&bad).is_err());
    }

    #[test]
    fn svrg_schedule_by_hand() {
        let k0 = 0.7;
        let c = svrg_c_schedule(k0, 2);
        assert_eq!(c[3], 0.0);
        assert_eq!(c[2], k0);
        assert!((c[1] - k0 * (1.0 + 1.5)).abs() < 1e-15);
        for t in 0..3 {
            assert!(c[t] > c[t + 1]);
        }
    }

    #[test]
    fn saga_schedule_recursion() {
        let p = crate::estimators::saga_inclusion_probability(4, 2);
        assert!((p - 0.4375).abs() < 1e-15);
        let beta = saga_beta(4, 2);
        let c = saga_c_schedule(1.0, p, beta, 10);
        assert_eq!(c[10], 0.0);
        for t in 0..10 {
            assert_eq!(c[t], 1.0 + (1.0 - p) * (1.0 + beta) * c[t + 1]);
            assert!(c[t] > c[t + 1]);
        }
    }

    #[test]
    fn mismatched_lyapunov_rejected() {
        let consts = LyapunovConstants {
            lipschitz: 1.0,
            sigma_a_min: 1.0,
            sigma_g_max: 1.0,
            rho: 1.0,
            eta: 1.0,
            batch: 1.0,
            kappa_a: 1.0,
        };
        let w = LyapunovWindow::Spider {
            aug_lagrangian: 2.0,
            last_step_sq: 1.0,
            period_sum_sq: 0.0,
        };
        assert!(lyapunov_value(SolverKind::Svrg, &w, &consts).is_err());
        assert!(lyapunov_value(SolverKind::Sgd, &w, &consts).is_err());
        // 2 + (9 + 3)·1
        assert_eq!(lyapunov_value(SolverKind::Spider, &w, &consts).unwrap(), 14.0);
    }
}
