//! The two applications as `CompositeProblem`s.

use vradmm_core::admm::{Block, CompositeProblem, SPECTRAL_TOL};
use vradmm_core::linalg::{spectral_extremes, LinearOperator};
use vradmm_core::losses::{MultitaskLoss, SampleSet, SigmoidLoss};
use vradmm_core::regularizers::Regularizer;

use crate::error::{BenchError, Result};

/// Graph-guided sparse classification:
/// `min (1/n)Σ sigmoid(−b_i a_iᵀx) + λ‖y‖₁  s.t.  [E; μI] x − y = 0`.
///
/// `μ > 0` adds a plain lasso part and makes the constraint full column rank.
pub fn build_graph_problem(
    samples: SampleSet,
    edges: &LinearOperator,
    lambda: f64,
    mu: f64,
) -> Result<CompositeProblem<SigmoidLoss>> {
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(BenchError::Config(format!("mu must be >= 0, got {mu}")));
    }
    let d = samples.dim();
    if edges.cols() != d {
        return Err(BenchError::Config(format!(
            "edge matrix has {} columns but the data has {d} features",
            edges.cols()
        )));
    }
    let a = match (edges.rows(), mu > 0.0) {
        (0, false) => {
            return Err(BenchError::Config(
                "no edges and mu = 0 leaves an empty constraint; use mu > 0".into(),
            ))
        }
        (0, true) => LinearOperator::scaled_identity(d, mu),
        (_, false) => edges.clone(),
        (_, true) => LinearOperator::stack(vec![edges.clone(), LinearOperator::scaled_identity(d, mu)])?,
    };
    let (lo, hi) = spectral_extremes(&a, 1e-12)?;
    if lo <= SPECTRAL_TOL * hi.max(1.0) {
        return Err(BenchError::Config(format!(
            "constraint matrix lacks full column rank (smallest eigenvalue of AᵀA is {lo:.3e}); use mu > 0"
        )));
    }
    let rows = a.rows();
    let block = Block::new(LinearOperator::scaled_identity(rows, -1.0), Regularizer::l1(lambda)?);
    let loss = SigmoidLoss::new(samples)?;
    Ok(CompositeProblem::new(loss, a, vec![block], vec![0.0; rows])?.with_a_spectrum(lo, hi)?)
}

/// Sparse plus low-rank multi-task classification with `X = Y₁ = Y₂`:
/// `g₁ = λ₁κ₀‖Y₁‖₁`, `g₂ = λ₂‖Y₂‖_*`, and the smooth remainder of the
/// log-sum penalty folded into the loss.
pub fn build_multitask_problem(
    samples: SampleSet,
    lambda1: f64,
    lambda2: f64,
    alpha_ls: f64,
    beta_ls: f64,
) -> Result<CompositeProblem<MultitaskLoss>> {
    if samples.is_binary() {
        return Err(BenchError::Config(
            "multi-task problem needs class labels 1..=c; use the graph problem for ±1 labels".into(),
        ));
    }
    let loss = MultitaskLoss::new(samples, lambda1, alpha_ls, beta_ls)?;
    let (c, d) = (loss.classes(), loss.features());
    let n = c * d;
    let id = || LinearOperator::identity(n);
    let zero = || LinearOperator::scaled_identity(n, 0.0);
    let a = LinearOperator::stack(vec![id(), id()])?;
    let b1 = LinearOperator::stack(vec![LinearOperator::scaled_identity(n, -1.0), zero()])?;
    let b2 = LinearOperator::stack(vec![zero(), LinearOperator::scaled_identity(n, -1.0)])?;
    let g1 = Regularizer::l1(lambda1 * loss.kappa0())?;
    let g2 = Regularizer::nuclear(lambda2, c, d)?;
    Ok(CompositeProblem::new(
        loss,
        a,
        vec![Block::new(b1, g1), Block::new(b2, g2)],
        vec![0.0; 2 * n],
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::edge_matrix;
    use vradmm_core::admm::{derive_hyperparams, HyperParams, SolverKind};
    use vradmm_core::linalg::SeededRng;

    fn binary(n: usize, d: usize) -> SampleSet {
        let mut rng = SeededRng::new(1, 0);
        let labels = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        SampleSet::from_dense(d, &rng.normal_vec(n * d), labels).unwrap()
    }

    #[test]
    fn empty_graph_is_lasso() {
        let e = edge_matrix(&[], 4).unwrap();
        let p = build_graph_problem(binary(10, 4), &e, 1e-5, 1.0).unwrap();
        assert_eq!(p.a().to_dense(), LinearOperator::identity(4).to_dense());
        assert!(build_graph_problem(binary(10, 4), &e, 1e-5, 0.0).is_err());
    }

    #[test]
    fn path_graph_rank() {
        let e = edge_matrix(&[(0, 1), (1, 2)], 3).unwrap();
        let p = build_graph_problem(binary(10, 3), &e, 1e-5, 1.0).unwrap();
        let (lo, _) = spectral_extremes(p.a(), 1e-12).unwrap();
        assert!(lo >= 1.0 - 1e-12);
        let err = build_graph_problem(binary(10, 3), &e, 1e-5, 0.0).unwrap_err().to_string();
        assert!(err.contains("full column rank"), "{err}");
    }

    #[test]
    fn graph_feasibility_witness() {
        let e = edge_matrix(&[(0, 1), (2, 3)], 4).unwrap();
        let p = build_graph_problem(binary(10, 4), &e, 1e-5, 0.5).unwrap();
        let x = SeededRng::new(2, 0).normal_vec(4);
        let y = p.a().apply(&x).unwrap();
        assert!(p.residual(&x, &[y]).iter().all(|r| *r == 0.0));
    }

    #[test]
    fn multitask_structure() {
        let mut rng = SeededRng::new(3, 0);
        let labels = (0..30).map(|i| (i % 3 + 1) as f64).collect();
        let s = SampleSet::from_dense(4, &rng.normal_vec(120), labels).unwrap();
        let p = build_multitask_problem(s.clone(), 1e-5, 1e-4, 1.0, 1.0).unwrap();
        assert_eq!(spectral_extremes(p.a(), 1e-12).unwrap(), (2.0, 2.0));
        assert_eq!(p.blocks()[0].reg, Regularizer::L1 { lambda: 1e-5 });
        let x = rng.normal_vec(12);
        let res = p.residual(&x, &[x.clone(), x.clone()]);
        assert!(res.iter().all(|r| *r == 0.0));
        let spectra = derive_hyperparams(&p, &HyperParams::default(), SolverKind::Spider).unwrap();
        assert_eq!(spectra.kappa_a, 1.0);
        assert!(build_multitask_problem(binary(10, 4), 1e-5, 1e-4, 1.0, 1.0).is_err());
    }
}
