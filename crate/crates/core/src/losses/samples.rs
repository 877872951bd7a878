use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Result};

/// Training samples `(a_i, b_i)` with rows stored in compressed sparse form.
///
/// Labels are kept as given: `±1` for binary problems, `1..=c` for multi-class ones.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
    labels: Vec<f64>,
}

impl SampleSet {
    /// Builds a set from sparse rows of `(feature, value)` pairs (0-based features).
    pub fn from_sparse_rows(dim: usize, rows: &[Vec<(usize, f64)>], labels: Vec<f64>) -> Result<Self> {
        if rows.is_empty() {
            return Err(invalid("sample set needs at least one sample"));
        }
        if rows.len() != labels.len() {
            return Err(invalid(format!(
                "{} feature rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        if dim == 0 {
            return Err(invalid("feature dimension must be positive"));
        }
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in rows {
            let mut row = row.clone();
            row.sort_by_key(|&(j, _)| j);
            for (j, v) in row {
                if j >= dim {
                    return Err(invalid(format!("feature index {j} out of range for dimension {dim}")));
                }
                if !v.is_finite() {
                    return Err(invalid("non-finite feature value"));
                }
                if v != 0.0 {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        if labels.iter().any(|l| !l.is_finite()) {
            return Err(invalid("non-finite label"));
        }
        Ok(SampleSet {
            dim,
            indptr,
            indices,
            values,
            labels,
        })
    }

    /// Builds a set from a row-major dense `n × dim` feature matrix.
    pub fn from_dense(dim: usize, features: &[f64], labels: Vec<f64>) -> Result<Self> {
        if dim == 0 || features.len() != dim * labels.len() {
            return Err(invalid("dense features must be labels.len() × dim"));
        }
        let rows: Vec<Vec<(usize, f64)>> = features
            .chunks_exact(dim)
            .map(|r| r.iter().copied().enumerate().collect())
            .collect();
        Self::from_sparse_rows(dim, &rows, labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    /// Nonzero pattern of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[span.clone()], &self.values[span])
    }

    /// `a_iᵀ x` for `x` of length `dim`, or of row `offset..offset+dim` in a longer slice.
    #[inline]
    pub fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let (idx, val) = self.row(i);
        idx.iter().zip(val).map(|(&j, &a)| a * x[j]).sum()
    }

    /// `out += alpha * a_i`
    #[inline]
    pub fn row_axpy(&self, i: usize, alpha: f64, out: &mut [f64]) {
        let (idx, val) = self.row(i);
        for (&j, &a) in idx.iter().zip(val) {
            out[j] += alpha * a;
        }
    }

    pub fn row_norm_sq(&self, i: usize) -> f64 {
        self.row(i).1.iter().map(|a| a * a).sum()
    }

    pub fn max_row_norm_sq(&self) -> f64 {
        (0..self.len()).map(|i| self.row_norm_sq(i)).fold(0.0, f64::max)
    }

    /// Dense copy of row `i`.
    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.dim];
        self.row_axpy(i, 1.0, &mut out);
        out
    }

    /// True when every label is `-1` or `+1`.
    pub fn is_binary(&self) -> bool {
        self.labels.iter().all(|&l| l == 1.0 || l == -1.0)
    }

    /// Number of classes when every label is an integer in `1..`, else `None`.
    pub fn num_classes(&self) -> Option<usize> {
        let mut max = 0usize;
        for &l in &self.labels {
            if l < 1.0 || libm::trunc(l) != l {
                return None;
            }
            max = max.max(l as usize);
        }
        Some(max)
    }

    /// Subset of rows, in the given order.
    pub fn select(&self, rows: &[usize]) -> Result<Self> {
        let sparse: Vec<Vec<(usize, f64)>> = rows
            .iter()
            .map(|&i| {
                let (idx, val) = self.row(i);
                idx.iter().copied().zip(val.iter().copied()).collect()
            })
            .collect();
        let labels = rows.iter().map(|&i| self.labels[i]).collect();
        Self::from_sparse_rows(self.dim, &sparse, labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rows_and_labels() {
        let s = SampleSet::from_sparse_rows(3, &[vec![(2, 2.0), (0, 0.5)], vec![]], vec![1.0, -1.0]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.row(0), (&[0usize, 2][..], &[0.5, 2.0][..]));
        assert_eq!(s.row_dot(0, &[1.0, 1.0, 1.0]), 2.5);
        assert!(s.is_binary());
        assert_eq!(s.num_classes(), None);
    }

    #[test]
    fn rejects_empty_and_out_of_range() {
        assert!(SampleSet::from_sparse_rows(3, &[], vec![]).is_err());
        assert!(SampleSet::from_sparse_rows(3, &[vec![(3, 1.0)]], vec![1.0]).is_err());
        assert!(SampleSet::from_sparse_rows(3, &[vec![(0, 1.0)]], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn class_count() {
        let s = SampleSet::from_dense(1, &[1.0, 2.0, 3.0], vec![1.0, 3.0, 2.0]).unwrap();
        assert_eq!(s.num_classes(), Some(3));
        assert!(!s.is_binary());
    }
}
