use alloc::vec;
use alloc::vec::Vec;

use super::{CompositeProblem, DerivedSpectra};
use crate::error::{check_dim, Result};
use crate::estimators::IfoCounter;
use crate::linalg::{axpy, norm, SeededRng};
use crate::losses::SmoothLoss;

/// Primal-dual iterate `(x, y_1..y_m, z)` with the last gradient estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    pub x: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub z: Vec<f64>,
    pub v: Vec<f64>,
    /// Completed iterations.
    pub k: usize,
    pub ifo: IfoCounter,
}

impl IterateState {
    /// `x₀` and `y_j⁰` with standard normal entries, `z₀ = 0`.
    pub fn initial<L: SmoothLoss>(problem: &CompositeProblem<L>, rng: &mut SeededRng) -> Self {
        let x = rng.normal_vec(problem.dim());
        let y = problem.block_dims().into_iter().map(|p| rng.normal_vec(p)).collect();
        IterateState::from_parts(problem, x, y, vec![0.0; problem.constraint_rows()])
    }

    pub fn from_parts<L: SmoothLoss>(problem: &CompositeProblem<L>, x: Vec<f64>, y: Vec<Vec<f64>>, z: Vec<f64>) -> Self {
        let d = problem.dim();
        IterateState {
            x,
            y,
            z,
            v: vec![0.0; d],
            k: 0,
            ifo: IfoCounter::new(),
        }
    }

    pub fn check<L: SmoothLoss>(&self, problem: &CompositeProblem<L>) -> Result<()> {
        problem.check_point(&self.x, &self.y)?;
        check_dim(problem.constraint_rows(), self.z.len())
    }
}

/// Gauss–Seidel prox step for block `j`.
///
/// `y_j⁺ = prox_{g_j, r_j}(w)` with
/// `w = (1/r_j)(H_j y_j − ρ B_jᵀ c̃ + B_jᵀ z)`, where `c̃` is the residual
/// without block `j`, built from the blocks currently stored in `state`.
pub fn update_y_block<L: SmoothLoss>(
    problem: &CompositeProblem<L>,
    spectra: &DerivedSpectra,
    state: &IterateState,
    j: usize,
) -> Result<Vec<f64>> {
    let blk = &problem.blocks()[j];
    let rj = spectra.r_blocks[j];
    let rho = spectra.rho;
    // H_j y − ρBᵀc̃ = r_j y − ρBᵀ(B y + c̃)
    let res = problem.residual(&state.x, &state.y);
    let mut scaled = state.z.clone();
    axpy(-rho, &res, &mut scaled);
    let mut w = vec![0.0; blk.op.cols()];
    blk.op.apply_transpose_into(&scaled, &mut w);
    for (wi, yi) in w.iter_mut().zip(&state.y[j]) {
        *wi = yi + *wi / rj;
    }
    blk.reg.prox(&w, rj)
}

/// Linearized x-step `x⁺ = x − (η/r)(v − Aᵀz + ρAᵀ(Ax + ΣB_j y_j − c))`, using
/// the y-blocks stored in `state`.
pub fn update_x<L: SmoothLoss>(
    problem: &CompositeProblem<L>,
    spectra: &DerivedSpectra,
    state: &IterateState,
    v: &[f64],
) -> Vec<f64> {
    let res = problem.residual(&state.x, &state.y);
    let mut u = state.z.clone();
    axpy(-spectra.rho, &res, &mut u);
    let mut grad = vec![0.0; problem.dim()];
    problem.a().apply_transpose_into(&u, &mut grad);
    let step = spectra.eta / spectra.r;
    state
        .x
        .iter()
        .zip(v)
        .zip(&grad)
        .map(|((x, v), g)| x - step * (v - g))
        .collect()
}

/// Norm of `v + (G/η)(x⁺ − x) − Aᵀz + ρAᵀ(Ax⁺ + ΣB_j y_j − c)`, zero at the exact x-step.
pub fn x_optimality_residual<L: SmoothLoss>(
    problem: &CompositeProblem<L>,
    spectra: &DerivedSpectra,
    x_old: &[f64],
    x_new: &[f64],
    y: &[Vec<f64>],
    z: &[f64],
    v: &[f64],
) -> f64 {
    let a = problem.a();
    let (rho, eta) = (spectra.rho, spectra.eta);
    let dx: Vec<f64> = x_new.iter().zip(x_old).map(|(a, b)| a - b).collect();
    let mut adx = vec![0.0; a.rows()];
    a.apply_into(&dx, &mut adx);
    let res = problem.residual(x_new, y);
    // ρAᵀ(res − A dx) − Aᵀz
    let mut u: Vec<f64> = res.iter().zip(&adx).map(|(r, s)| rho * (r - s)).collect();
    axpy(-1.0, z, &mut u);
    let mut out = vec![0.0; x_old.len()];
    a.apply_transpose_into(&u, &mut out);
    for ((o, v), d) in out.iter_mut().zip(v).zip(&dx) {
        *o += v + spectra.r / eta * d;
    }
    norm(&out)
}

/// Dual ascent `z⁺ = z − ρ (A x + ΣB_j y_j − c)`; returns `(z⁺, residual)`.
pub fn update_z<L: SmoothLoss>(
    problem: &CompositeProblem<L>,
    spectra: &DerivedSpectra,
    state: &IterateState,
) -> (Vec<f64>, Vec<f64>) {
    let res = problem.residual(&state.x, &state.y);
    let mut z = state.z.clone();
    axpy(-spectra.rho, &res, &mut z);
    (z, res)
}
