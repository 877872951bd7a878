#![allow(dead_code)]

use vradmm_core::admm::{Block, CompositeProblem};
use vradmm_core::linalg::{LinearOperator, SeededRng};
use vradmm_core::losses::{SampleSet, SigmoidLoss};
use vradmm_core::regularizers::Regularizer;

/// Binary samples with unit-norm Gaussian rows and labels from a planted model.
pub fn binary_samples(n: usize, d: usize, seed: u64) -> SampleSet {
    binary_samples_scaled(n, d, 1.0, seed)
}

pub fn binary_samples_scaled(n: usize, d: usize, row_norm: f64, seed: u64) -> SampleSet {
    let mut rng = SeededRng::new(seed, 7);
    let x_true = rng.normal_vec(d);
    let mut feats = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let mut a = rng.normal_vec(d);
        let nrm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        a.iter_mut().for_each(|v| *v *= row_norm / nrm);
        let m: f64 = a.iter().zip(&x_true).map(|(p, q)| p * q).sum::<f64>() + 0.3 * rng.standard_normal();
        labels.push(if m >= 0.0 { 1.0 } else { -1.0 });
        feats.extend(a);
    }
    SampleSet::from_dense(d, &feats, labels).unwrap()
}

/// `[chain edges; I]` for a path graph on `d` nodes.
pub fn chain_constraint(d: usize) -> LinearOperator {
    chain_constraint_mu(d, 1.0)
}

/// `[chain edges; μI]`
pub fn chain_constraint_mu(d: usize, mu: f64) -> LinearOperator {
    let mut t = Vec::new();
    for i in 0..d - 1 {
        t.push((i, i, 1.0));
        t.push((i, i + 1, -1.0));
    }
    let edges = LinearOperator::from_triplets(d - 1, d, &t).unwrap();
    LinearOperator::stack(vec![edges, LinearOperator::scaled_identity(d, mu)]).unwrap()
}

/// Sigmoid loss with a graph-guided lasso penalty: `Ax − y = 0`, `g = λ‖·‖₁`.
pub fn graph_problem(n: usize, d: usize, lambda: f64, seed: u64) -> CompositeProblem<SigmoidLoss> {
    graph_problem_mu(n, d, lambda, 1.0, seed)
}

pub fn graph_problem_mu(n: usize, d: usize, lambda: f64, mu: f64, seed: u64) -> CompositeProblem<SigmoidLoss> {
    let loss = SigmoidLoss::new(binary_samples(n, d, seed)).unwrap();
    let a = chain_constraint_mu(d, mu);
    let l = a.rows();
    let block = Block::new(LinearOperator::scaled_identity(l, -1.0), Regularizer::l1(lambda).unwrap());
    CompositeProblem::new(loss, a, vec![block], vec![0.0; l]).unwrap()
}

/// Gaussian feature rows without normalization, so `‖a_i‖² ≈ d`.
pub fn binary_samples_raw(n: usize, d: usize, seed: u64) -> SampleSet {
    let mut rng = SeededRng::new(seed, 7);
    let x_true = rng.normal_vec(d);
    let mut feats = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let a = rng.normal_vec(d);
        let m: f64 = a.iter().zip(&x_true).map(|(p, q)| p * q).sum::<f64>() + 0.3 * rng.standard_normal();
        labels.push(if m >= 0.0 { 1.0 } else { -1.0 });
        feats.extend(a);
    }
    SampleSet::from_dense(d, &feats, labels).unwrap()
}

pub fn graph_problem_raw(n: usize, d: usize, lambda: f64, seed: u64) -> CompositeProblem<SigmoidLoss> {
    let loss = SigmoidLoss::new(binary_samples_raw(n, d, seed)).unwrap();
    let a = chain_constraint(d);
    let l = a.rows();
    let block = Block::new(LinearOperator::scaled_identity(l, -1.0), Regularizer::l1(lambda).unwrap());
    CompositeProblem::new(loss, a, vec![block], vec![0.0; l]).unwrap()
}
