//! Feature graphs for the graph-guided penalty.

use vradmm_core::linalg::LinearOperator;
use vradmm_core::losses::SampleSet;

use crate::error::{BenchError, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Pearson correlation matrix of the feature columns (row-major `d × d`).
/// A constant column has zero correlation with everything.
pub fn feature_correlations(samples: &SampleSet) -> Vec<f64> {
    let (n, d) = (samples.len(), samples.dim());
    let mut mean = vec![0.0; d];
    for i in 0..n {
        samples.row_axpy(i, 1.0 / n as f64, &mut mean);
    }
    let mut cov = vec![0.0; d * d];
    for i in 0..n {
        let mut a = samples.dense_row(i);
        a.iter_mut().zip(&mean).for_each(|(v, m)| *v -= m);
        for p in 0..d {
            if a[p] == 0.0 {
                continue;
            }
            for q in p..d {
                cov[p * d + q] += a[p] * a[q];
            }
        }
    }
    let sd: Vec<f64> = (0..d).map(|p| cov[p * d + p].sqrt()).collect();
    let mut corr = vec![0.0; d * d];
    for p in 0..d {
        for q in p..d {
            let denom = sd[p] * sd[q];
            let c = if denom > 0.0 { cov[p * d + q] / denom } else { 0.0 };
            corr[p * d + q] = c;
            corr[q * d + p] = c;
        }
    }
    corr
}

/// Feature pairs `(i, j)`, `i < j`, with `|corr| > threshold`, in lexicographic order.
pub fn fusion_edges(samples: &SampleSet, threshold: f64) -> Result<Vec<(usize, usize)>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(BenchError::Config(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    let d = samples.dim();
    let corr = feature_correlations(samples);
    let mut edges = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            if corr[i * d + j].abs() > threshold {
                edges.push((i, j));
            }
        }
    }
    Ok(edges)
}

/// Edge-incidence matrix with one row `e_i − e_j` per edge. Pairs are
/// oriented `i < j`, sorted and deduplicated first.
pub fn edge_matrix(edges: &[(usize, usize)], dim: usize) -> Result<LinearOperator> {
    let edges = canonical_edges(edges);
    let mut t = Vec::with_capacity(2 * edges.len());
    for (row, &(i, j)) in edges.iter().enumerate() {
        if j >= dim {
            return Err(BenchError::Config(format!("edge ({i}, {j}) out of range for {dim} features")));
        }
        t.push((row, i, 1.0));
        t.push((row, j, -1.0));
    }
    Ok(LinearOperator::from_triplets(edges.len(), dim, &t)?)
}

pub fn canonical_edges(edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = edges
        .iter()
        .filter(|(i, j)| i != j)
        .map(|&(i, j)| (i.min(j), i.max(j)))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

pub fn build_fusion_graph(samples: &SampleSet, threshold: f64) -> Result<LinearOperator> {
    edge_matrix(&fusion_edges(samples, threshold)?, samples.dim())
}
