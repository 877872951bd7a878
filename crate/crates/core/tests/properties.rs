mod common;

use proptest::prelude::*;
use vradmm_core::linalg::{dist_sq, dot, norm_sq, spectral_extremes, LinearOperator, SeededRng};
use vradmm_core::losses::{SigmoidLoss, SmoothLoss};
use vradmm_core::regularizers::Regularizer;

fn random_operator(seed: u64, rows: usize, cols: usize) -> LinearOperator {
    let mut rng = SeededRng::new(seed, 0);
    match seed % 4 {
        0 => LinearOperator::dense(rows, cols, rng.normal_vec(rows * cols)).unwrap(),
        1 => {
            let t: Vec<(usize, usize, f64)> = (0..rows * 2)
                .map(|_| (rng.index(rows), rng.index(cols), rng.standard_normal()))
                .collect();
            LinearOperator::from_triplets(rows, cols, &t).unwrap()
        }
        2 => LinearOperator::stack(vec![
            LinearOperator::dense(rows, cols, rng.normal_vec(rows * cols)).unwrap(),
            LinearOperator::scaled_identity(cols, 0.5),
        ])
        .unwrap(),
        _ => LinearOperator::kron_identity(LinearOperator::dense(rows, cols, rng.normal_vec(rows * cols)).unwrap(), 2)
            .unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transpose_is_adjoint(seed in 0u64..1000, rows in 1usize..7, cols in 1usize..7) {
        let op = random_operator(seed, rows, cols);
        let mut rng = SeededRng::new(seed, 1);
        let x = rng.normal_vec(op.cols());
        let u = rng.normal_vec(op.rows());
        let lhs = dot(&op.apply(&x).unwrap(), &u);
        let rhs = dot(&x, &op.apply_transpose(&u).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn gram_spectrum_brackets_rayleigh_quotients(seed in 0u64..1000, rows in 1usize..7, cols in 1usize..6) {
        let op = random_operator(seed, rows, cols);
        let (lo, hi) = spectral_extremes(&op, 1e-12).unwrap();
        let mut rng = SeededRng::new(seed, 2);
        for _ in 0..5 {
            let x = rng.normal_vec(op.cols());
            let q = norm_sq(&op.apply(&x).unwrap()) / norm_sq(&x);
            prop_assert!(q >= lo - 1e-9 * hi.max(1.0) && q <= hi + 1e-9 * hi.max(1.0));
        }
    }

    #[test]
    fn l1_prox_is_optimal_and_nonexpansive(seed in 0u64..1000, lambda in 0.0f64..3.0, r in 0.1f64..5.0) {
        let g = Regularizer::l1(lambda).unwrap();
        let mut rng = SeededRng::new(seed, 3);
        let (w1, w2) = (rng.normal_vec(8), rng.normal_vec(8));
        let (p1, p2) = (g.prox(&w1, r).unwrap(), g.prox(&w2, r).unwrap());
        prop_assert!(dist_sq(&p1, &p2) <= dist_sq(&w1, &w2) + 1e-15);
        let t: Vec<f64> = w1.iter().zip(&p1).map(|(w, y)| r * (w - y)).collect();
        prop_assert!(g.min_subgrad_dist_sq(&p1, &t).unwrap() <= 1e-20);
    }

    #[test]
    fn nuclear_prox_is_nonexpansive(seed in 0u64..300, lambda in 0.0f64..2.0) {
        let g = Regularizer::nuclear(lambda, 3, 4).unwrap();
        let mut rng = SeededRng::new(seed, 4);
        let (w1, w2) = (rng.normal_vec(12), rng.normal_vec(12));
        let (p1, p2) = (g.prox(&w1, 1.3).unwrap(), g.prox(&w2, 1.3).unwrap());
        prop_assert!(dist_sq(&p1, &p2) <= dist_sq(&w1, &w2) * (1.0 + 1e-10));
        prop_assert!(g.value(&p1).unwrap() <= g.value(&w1).unwrap() + 1e-10);
    }

    #[test]
    fn sigmoid_gradient_is_lipschitz(seed in 0u64..200) {
        let f = SigmoidLoss::new(common::binary_samples_raw(30, 5, seed)).unwrap();
        let mut rng = SeededRng::new(seed, 5);
        let (x, y) = (rng.normal_vec(5), rng.normal_vec(5));
        let gap = dist_sq(&f.full_grad(&x), &f.full_grad(&y)).sqrt();
        prop_assert!(gap <= f.lipschitz() * dist_sq(&x, &y).sqrt() * (1.0 + 1e-12));
    }
}
