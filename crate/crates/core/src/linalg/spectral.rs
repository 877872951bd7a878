use alloc::format;
use nalgebra::DMatrix;

use super::LinearOperator;
use crate::error::{Error, Result};

/// Largest `cols` for which `spectral_extremes` will form and factor `opᵀop`.
pub const DEFAULT_EIGEN_CAP: usize = 2048;

/// Smallest and largest eigenvalues of `opᵀop`.
pub fn spectral_extremes(op: &LinearOperator, tol: f64) -> Result<(f64, f64)> {
    spectral_extremes_capped(op, tol, DEFAULT_EIGEN_CAP)
}

pub fn spectral_extremes_capped(op: &LinearOperator, tol: f64, cap: usize) -> Result<(f64, f64)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    if let Some(s) = op.scalar_gram() {
        return Ok((s, s));
    }
    let n = op.cols();
    if n > cap {
        return Err(Error::Capability(format!(
            "operator has {n} columns, above the dense eigensolver cap of {cap}; \
             supply sigma_min/sigma_max of AᵀA in the configuration"
        )));
    }
    let gram = gram_matrix(op);
    if is_diagonal(&gram) {
        let (lo, hi) = gram
            .diagonal()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| (lo.min(d), hi.max(d)));
        return Ok((lo.max(0.0), hi));
    }
    let eig = nalgebra::SymmetricEigen::try_new(gram, tol.min(1e-12).max(f64::EPSILON), 0)
        .ok_or_else(|| Error::Capability("symmetric eigensolver did not converge".into()))?;
    let (lo, hi) = eig
        .eigenvalues
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| (lo.min(d), hi.max(d)));
    Ok((lo.max(0.0), hi))
}

fn gram_matrix(op: &LinearOperator) -> DMatrix<f64> {
    let (rows, cols) = (op.rows(), op.cols());
    let dense = op.to_dense();
    let a = DMatrix::from_row_slice(rows, cols, &dense);
    a.transpose() * a
}

fn is_diagonal(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] == 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SeededRng;
    use alloc::vec;
    use alloc::vec::Vec;

    // Cyclic Jacobi eigenvalue iteration on a dense symmetric matrix.
    fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
        let n = a.len();
        for _ in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|(i, j)| i != j)
                .map(|(i, j)| a[i][j] * a[i][j])
                .sum();
            if off < 1e-26 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / libm::sqrt(t * t + 1.0);
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a[k][p], a[k][q]);
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[p][k], a[q][k]);
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| a[i][i]).collect()
    }

    #[test]
    fn diagonal_operator() {
        let op = LinearOperator::dense(2, 2, vec![2.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(spectral_extremes(&op, 1e-12).unwrap(), (1.0, 4.0));
    }

    #[test]
    fn stacked_identities_have_gram_two() {
        let op = LinearOperator::stack(vec![LinearOperator::identity(3), LinearOperator::identity(3)]).unwrap();
        assert_eq!(spectral_extremes(&op, 1e-12).unwrap(), (2.0, 2.0));
    }

    #[test]
    fn single_row_is_rank_one() {
        let op = LinearOperator::dense(1, 2, vec![1.0, 1.0]).unwrap();
        let (lo, hi) = spectral_extremes(&op, 1e-12).unwrap();
        assert!(lo.abs() < 1e-12);
        assert!((hi - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cap_exceeded_is_a_capability_error() {
        let op = LinearOperator::from_triplets(2, 10, &[(0, 0, 1.0), (1, 3, 1.0)]).unwrap();
        assert!(matches!(
            spectral_extremes_capped(&op, 1e-10, 5),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn matches_jacobi_oracle_on_random_psd() {
        let mut rng = SeededRng::new(11, 0);
        for trial in 0..20 {
            let (rows, cols) = (3 + trial % 5, 2 + trial % 6);
            let data: Vec<f64> = (0..rows * cols).map(|_| rng.standard_normal()).collect();
            let op = LinearOperator::dense(rows, cols, data.clone()).unwrap();
            let mut gram = vec![vec![0.0; cols]; cols];
            for i in 0..cols {
                for j in 0..cols {
                    gram[i][j] = (0..rows).map(|r| data[r * cols + i] * data[r * cols + j]).sum();
                }
            }
            let eig = jacobi_eigenvalues(gram);
            let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min).max(0.0);
            let hi = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let (l, h) = spectral_extremes(&op, 1e-10).unwrap();
            assert!((h - hi).abs() <= 1e-10 * hi, "max {h} vs {hi}");
            assert!((l - lo).abs() <= 1e-10 * hi, "min {l} vs {lo}");
        }
    }
}
