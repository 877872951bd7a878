use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, invalid, Result};

/// Linear operator in one of a handful of structured representations.
///
/// Matrix-shaped variables `X ∈ R^{p×d}` are stored row-major as flat vectors;
/// [`LinearOperator::KronIdentity`] lifts an operator acting on the row index
/// (`inner ⊗ I_d`) so one generic solver handles both vector and matrix unknowns.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearOperator {
    /// Row-major dense matrix.
    Dense {
        rows: usize,
        cols: usize,
        data: Vec<f64>,
    },
    /// Compressed sparse rows.
    Csr {
        rows: usize,
        cols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    },
    /// `scale * I_n`. A zero scale gives the square zero block.
    ScaledIdentity { n: usize, scale: f64 },
    /// Vertical concatenation `[A_1; A_2; ...]`; all parts share `cols`.
    Stack(Vec<LinearOperator>),
    /// `inner ⊗ I_block` acting on row-major `inner.cols × block` matrices.
    KronIdentity {
        inner: Box<LinearOperator>,
        block: usize,
    },
}

impl LinearOperator {
    pub fn identity(n: usize) -> Self {
        LinearOperator::ScaledIdentity { n, scale: 1.0 }
    }

    pub fn scaled_identity(n: usize, scale: f64) -> Self {
        LinearOperator::ScaledIdentity { n, scale }
    }

    pub fn dense(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid("dense operator needs positive dimensions"));
        }
        check_dim(rows * cols, data.len())?;
        Ok(LinearOperator::Dense { rows, cols, data })
    }

    /// Builds a CSR operator from `(row, col, value)` triplets. Duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        if cols == 0 {
            return Err(invalid("sparse operator needs at least one column"));
        }
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        for &(r, c, _) in &sorted {
            if r >= rows || c >= cols {
                return Err(invalid("triplet index out of range"));
            }
        }
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            indices.push(c);
            values.push(v);
            indptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        Ok(LinearOperator::Csr {
            rows,
            cols,
            indptr,
            indices,
            values,
        })
    }

    pub fn stack(parts: Vec<LinearOperator>) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| invalid("stack needs at least one part"))?;
        let cols = first.cols();
        for p in &parts {
            check_dim(cols, p.cols())?;
        }
        Ok(LinearOperator::Stack(parts))
    }

    pub fn kron_identity(inner: LinearOperator, block: usize) -> Result<Self> {
        if block == 0 {
            return Err(invalid("identity-Kronecker lift needs a positive block size"));
        }
        Ok(LinearOperator::KronIdentity {
            inner: Box::new(inner),
            block,
        })
    }

    pub fn rows(&self) -> usize {
        match self {
            LinearOperator::Dense { rows, .. } | LinearOperator::Csr { rows, .. } => *rows,
            LinearOperator::ScaledIdentity { n, .. } => *n,
            LinearOperator::Stack(parts) => parts.iter().map(|p| p.rows()).sum(),
            LinearOperator::KronIdentity { inner, block } => inner.rows() * block,
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            LinearOperator::Dense { cols, .. } | LinearOperator::Csr { cols, .. } => *cols,
            LinearOperator::ScaledIdentity { n, .. } => *n,
            LinearOperator::Stack(parts) => parts[0].cols(),
            LinearOperator::KronIdentity { inner, block } => inner.cols() * block,
        }
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.cols(), v.len())?;
        let mut out = vec![0.0; self.rows()];
        self.apply_into(v, &mut out);
        Ok(out)
    }

    pub fn apply_transpose(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.rows(), u.len())?;
        let mut out = vec![0.0; self.cols()];
        self.apply_transpose_into(u, &mut out);
        Ok(out)
    }

    /// `out = op · v`. Dimensions are the caller's responsibility.
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.cols());
        debug_assert_eq!(out.len(), self.rows());
        match self {
            LinearOperator::Dense { cols, data, .. } => {
                for (o, row) in out.iter_mut().zip(data.chunks_exact(*cols)) {
                    *o = super::dot(row, v);
                }
            }
            LinearOperator::Csr {
                indptr,
                indices,
                values,
                ..
            } => {
                for (r, o) in out.iter_mut().enumerate() {
                    let span = indptr[r]..indptr[r + 1];
                    *o = indices[span.clone()]
                        .iter()
                        .zip(&values[span])
                        .map(|(&c, &a)| a * v[c])
                        .sum();
                }
            }
            LinearOperator::ScaledIdentity { scale, .. } => {
                if *scale == 1.0 {
                    out.copy_from_slice(v);
                } else {
                    for (o, x) in out.iter_mut().zip(v) {
                        *o = scale * x;
                    }
                }
            }
            LinearOperator::Stack(parts) => {
                let mut offset = 0;
                for p in parts {
                    let r = p.rows();
                    p.apply_into(v, &mut out[offset..offset + r]);
                    offset += r;
                }
            }
            LinearOperator::KronIdentity { inner, block } => {
                lifted(inner, *block, v, out, false);
            }
        }
    }

    /// `out = opᵀ · u`.
    pub fn apply_transpose_into(&self, u: &[f64], out: &mut [f64]) {
        debug_assert_eq!(u.len(), self.rows());
        debug_assert_eq!(out.len(), self.cols());
        match self {
            LinearOperator::Dense { cols, data, .. } => {
                out.fill(0.0);
                for (row, &ur) in data.chunks_exact(*cols).zip(u) {
                    super::axpy(ur, row, out);
                }
            }
            LinearOperator::Csr {
                indptr,
                indices,
                values,
                ..
            } => {
                out.fill(0.0);
                for (r, &ur) in u.iter().enumerate() {
                    for k in indptr[r]..indptr[r + 1] {
                        out[indices[k]] += values[k] * ur;
                    }
                }
            }
            LinearOperator::ScaledIdentity { .. } => self.apply_into(u, out),
            LinearOperator::Stack(parts) => {
                out.fill(0.0);
                let mut tmp = vec![0.0; out.len()];
                let mut offset = 0;
                for p in parts {
                    let r = p.rows();
                    p.apply_transpose_into(&u[offset..offset + r], &mut tmp);
                    super::axpy(1.0, &tmp, out);
                    offset += r;
                }
            }
            LinearOperator::KronIdentity { inner, block } => {
                lifted(inner, *block, u, out, true);
            }
        }
    }

    /// Dense row-major copy of the operator.
    pub fn to_dense(&self) -> Vec<f64> {
        let (rows, cols) = (self.rows(), self.cols());
        let mut m = vec![0.0; rows * cols];
        let mut e = vec![0.0; cols];
        let mut col = vec![0.0; rows];
        for j in 0..cols {
            e[j] = 1.0;
            self.apply_into(&e, &mut col);
            e[j] = 0.0;
            for i in 0..rows {
                m[i * cols + j] = col[i];
            }
        }
        m
    }

    /// Structurally zero (every stored coefficient is 0).
    pub fn is_zero(&self) -> bool {
        match self {
            LinearOperator::Dense { data, .. } => data.iter().all(|&v| v == 0.0),
            LinearOperator::Csr { values, .. } => values.iter().all(|&v| v == 0.0),
            LinearOperator::ScaledIdentity { scale, .. } => *scale == 0.0,
            LinearOperator::Stack(parts) => parts.iter().all(|p| p.is_zero()),
            LinearOperator::KronIdentity { inner, block } => *block == 0 || inner.is_zero(),
        }
    }

    /// If `opᵀop = s·I`, returns `s` without forming the Gram matrix.
    pub fn scalar_gram(&self) -> Option<f64> {
        match self {
            LinearOperator::ScaledIdentity { scale, .. } => Some(scale * scale),
            LinearOperator::Stack(parts) => parts
                .iter()
                .map(|p| p.scalar_gram())
                .try_fold(0.0, |acc, s| s.map(|s| acc + s)),
            LinearOperator::KronIdentity { inner, .. } => inner.scalar_gram(),
            _ => None,
        }
    }
}

// Applies `inner ⊗ I_block` (or its transpose) to a row-major matrix stored in `v`.
fn lifted(inner: &LinearOperator, block: usize, v: &[f64], out: &mut [f64], transpose: bool) {
    let (in_rows, out_rows) = if transpose {
        (inner.rows(), inner.cols())
    } else {
        (inner.cols(), inner.rows())
    };
    let mut col_in = vec![0.0; in_rows];
    let mut col_out = vec![0.0; out_rows];
    for k in 0..block {
        for (i, c) in col_in.iter_mut().enumerate() {
            *c = v[i * block + k];
        }
        if transpose {
            inner.apply_transpose_into(&col_in, &mut col_out);
        } else {
            inner.apply_into(&col_in, &mut col_out);
        }
        for (i, c) in col_out.iter().enumerate() {
            out[i * block + k] = *c;
        }
    }
}
