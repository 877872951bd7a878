mod common;

use vradmm_core::admm::{
    derive_hyperparams, run, Block, CompositeProblem, HyperParams, IterateState, Silent, SolverKind,
};
use vradmm_core::diagnostics::{
    augmented_lagrangian, finite_diff_check, lyapunov_value, saga_beta, saga_c_schedule, stationarity_sq,
    svrg_c_schedule, theta_surrogate, LyapunovConstants, LyapunovWindow, ThetaWindow,
};
use vradmm_core::estimators::saga_inclusion_probability;
use vradmm_core::linalg::{LinearOperator, SeededRng};
use vradmm_core::losses::{MultitaskLoss, QuadraticLoss, SampleSet, SigmoidLoss, SmoothLoss};
use vradmm_core::regularizers::Regularizer;

fn lifted_quadratic() -> CompositeProblem<QuadraticLoss> {
    let loss = QuadraticLoss::new(3, vec![1.0, 2.0, -1.0, 3.0, 0.0, 1.0]).unwrap();
    let block = Block::new(LinearOperator::scaled_identity(3, -1.0), Regularizer::Zero);
    CompositeProblem::new(loss, LinearOperator::identity(3), vec![block], vec![0.0; 3]).unwrap()
}

#[test]
fn augmented_lagrangian_examples() {
    let p = lifted_quadratic();
    let x = vec![0.5, -1.0, 2.0];
    let f = p.loss().full_value(&x);
    let feasible = IterateState::from_parts(&p, x.clone(), vec![x.clone()], vec![7.0, -3.0, 1.0]);
    assert_eq!(augmented_lagrangian(&p, &feasible, 5.0).unwrap(), f);
    let mut y = x.clone();
    y[0] -= 1.0;
    let off = IterateState::from_parts(&p, x.clone(), vec![y], vec![0.0; 3]);
    assert!((augmented_lagrangian(&p, &off, 2.0).unwrap() - (f + 1.0)).abs() < 1e-14);
}

#[test]
fn augmented_lagrangian_matches_naive_evaluation() {
    let p = common::graph_problem(30, 5, 0.3, 2);
    let mut rng = SeededRng::new(4, 0);
    for _ in 0..20 {
        let st = IterateState::from_parts(&p, rng.normal_vec(5), vec![rng.normal_vec(9)], rng.normal_vec(9));
        let rho = 0.5 + rng.uniform();
        let a = p.a().to_dense();
        let mut naive = (0..30).map(|i| p.loss().sample_value(i, &st.x)).sum::<f64>() / 30.0;
        naive += 0.3 * st.y[0].iter().map(|v| v.abs()).sum::<f64>();
        for r in 0..9 {
            let ax: f64 = (0..5).map(|c| a[r * 5 + c] * st.x[c]).sum();
            let res = ax - st.y[0][r];
            naive += -st.z[r] * res + 0.5 * rho * res * res;
        }
        let got = augmented_lagrangian(&p, &st, rho).unwrap();
        assert!((got - naive).abs() <= 1e-12 * naive.abs().max(1.0));
    }
}

#[test]
fn stationarity_zero_at_kkt_point() {
    let p = lifted_quadratic();
    let x = p.loss().minimizer();
    let z = p.loss().full_grad(&x);
    let st = IterateState::from_parts(&p, x.clone(), vec![x.clone()], z);
    let rep = stationarity_sq(&p, &st).unwrap();
    assert!(rep.total_sq <= 1e-20);

    let mut xp = x.clone();
    xp[1] += 1e-3;
    let st = IterateState::from_parts(&p, xp, vec![x.clone()], vec![0.0; 3]);
    let rep = stationarity_sq(&p, &st).unwrap();
    // L = 1: the gradient block sees the full shift, the residual too.
    assert!((rep.grad_block_sq - 1e-6).abs() < 1e-15);
    assert!((rep.feasibility_sq - 1e-6).abs() < 1e-15);
    assert!((rep.total_sq - rep.grad_block_sq - rep.feasibility_sq - rep.y_block_sq[0]).abs() < 1e-20);
}

#[test]
fn stationarity_gradient_block_matches_naive() {
    let p = common::graph_problem(25, 4, 0.1, 5);
    let mut rng = SeededRng::new(9, 0);
    let a = p.a().to_dense();
    for _ in 0..10 {
        let st = IterateState::from_parts(&p, rng.normal_vec(4), vec![rng.normal_vec(7)], rng.normal_vec(7));
        let g = p.loss().full_grad(&st.x);
        let naive: f64 = (0..4)
            .map(|c| {
                let atz: f64 = (0..7).map(|r| a[r * 4 + c] * st.z[r]).sum();
                (atz - g[c]) * (atz - g[c])
            })
            .sum();
        let rep = stationarity_sq(&p, &st).unwrap();
        assert!((rep.grad_block_sq - naive).abs() <= 1e-12 * naive.max(1.0));
        assert!(rep.y_block_sq.iter().all(|v| *v >= 0.0));
    }
}

#[test]
fn theta_examples() {
    let still = ThetaWindow::Spider {
        next_step_sq: 0.0,
        prev_step_sq: 0.0,
        period_steps_sq: &[0.0],
        q: 1,
        y_step_sq: 0.0,
    };
    assert_eq!(theta_surrogate(&still).unwrap(), 0.0);
    let unit = ThetaWindow::Spider {
        next_step_sq: 1.0,
        prev_step_sq: 1.0,
        period_steps_sq: &[1.0],
        q: 1,
        y_step_sq: 0.0,
    };
    assert_eq!(theta_surrogate(&unit).unwrap(), 3.0);
    let short = ThetaWindow::Spider {
        next_step_sq: 1.0,
        prev_step_sq: 1.0,
        period_steps_sq: &[],
        q: 2,
        y_step_sq: 0.0,
    };
    assert!(theta_surrogate(&short).is_err());
}

#[test]
fn lyapunov_with_unit_period_has_no_inner_sum() {
    let p = common::graph_problem(20, 4, 0.1, 1);
    let s = derive_hyperparams(&p, &HyperParams::default(), SolverKind::Spider).unwrap();
    let c = LyapunovConstants::new(&s, 1, false);
    let w = LyapunovWindow::Spider {
        aug_lagrangian: 2.0,
        last_step_sq: 0.5,
        period_sum_sq: 0.0,
    };
    let r = lyapunov_value(SolverKind::Spider, &w, &c).unwrap();
    assert!((r - (2.0 + c.step_coefficient() * 0.5)).abs() < 1e-12);
    assert!(lyapunov_value(SolverKind::Svrg, &w, &c).is_err());
}

#[test]
fn c_schedules() {
    let k0 = 0.7;
    let c = svrg_c_schedule(k0, 2);
    assert_eq!(c[3], 0.0);
    assert_eq!(c[2], k0);
    assert!((c[1] - k0 * (1.0 + 1.5)).abs() < 1e-15);
    assert!(c.windows(2).all(|w| w[0] > w[1]));
    assert!((saga_inclusion_probability(4, 2) - 0.4375).abs() < 1e-15);
    let c = saga_c_schedule(k0, 0.4375, saga_beta(4, 2), 30);
    assert_eq!(c[30], 0.0);
    assert!(c.windows(2).all(|w| w[0] > w[1] && w[1] >= 0.0));
    for t in 0..30 {
        assert!((c[t] - (k0 + (1.0 - 0.4375) * (1.0 + 0.125) * c[t + 1])).abs() < 1e-15);
    }
}

#[test]
fn finite_differences() {
    let mut rng = SeededRng::new(2, 0);
    let q = QuadraticLoss::new(4, rng.normal_vec(12)).unwrap();
    assert!(finite_diff_check(&q, &rng.normal_vec(4), 1e-4).unwrap() <= 1e-10);

    let s = SigmoidLoss::new(common::binary_samples(10, 5, 3)).unwrap();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..30 {
        rows.extend(rng.normal_vec(4));
        labels.push((i % 3 + 1) as f64);
    }
    let m = MultitaskLoss::new(SampleSet::from_dense(4, &rows, labels).unwrap(), 0.05, 1.0, 1.0).unwrap();
    for _ in 0..20 {
        let x = rng.normal_vec(5);
        let h = 1e-6 * (1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt());
        assert!(finite_diff_check(&s, &x, h).unwrap() <= 1e-5);
        let x = rng.normal_vec(12);
        let h = 1e-6 * (1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt());
        assert!(finite_diff_check(&m, &x, h).unwrap() <= 1e-5);
    }
    assert!(finite_diff_check(&q, &[0.0; 4], 0.0).is_err());
}

#[test]
fn deterministic_lyapunov_descent() {
    let p = common::graph_problem_raw(200, 10, 1e-5, 10);
    let hp = HyperParams {
        iterations: 500,
        period: Some(1),
        lyapunov: true,
        seed: 4,
        ..Default::default()
    };
    let t = run(&p, &hp, SolverKind::Spider, &mut Silent).unwrap();
    let mut prev = t.initial.lyapunov.unwrap();
    for r in &t.records {
        let cur = r.lyapunov.unwrap();
        assert!(cur <= prev + 1e-10, "iteration {}: {prev} -> {cur}", r.iter);
        prev = cur;
    }
}

#[test]
fn chain_inequality_along_a_spider_run() {
    let p = common::graph_problem_raw(200, 10, 1e-5, 11);
    let hp = HyperParams {
        iterations: 500,
        stationarity: true,
        seed: 5,
        ..Default::default()
    };
    let t = run(&p, &hp, SolverKind::Spider, &mut Silent).unwrap();
    let nu = t.header.nu.max();
    for r in &t.records {
        let s = r.stationarity.unwrap();
        assert!(nu * r.theta >= s, "iteration {}: {} < {s}", r.iter, nu * r.theta);
    }
}
