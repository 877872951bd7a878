//! Quick property suites behind `vradmm check`: gradients against finite
//! differences, prox optimality, estimator bias and IFO bookkeeping.

use vradmm_core::admm::{run, CompositeProblem, HyperParams, Schedule, Silent, SolverKind};
use vradmm_core::diagnostics::finite_diff_check;
use vradmm_core::estimators::{
    ifo_total_deterministic, ifo_total_online, ifo_total_saga, ifo_total_sgd, ifo_total_spider, ifo_total_svrg,
    IfoCounter, SagaState, SpiderState, SvrgState,
};
use vradmm_core::linalg::{dist_sq, SeededRng};
use vradmm_core::losses::SmoothLoss;

use crate::error::Result;

const FD_STEP: f64 = 1e-6;
const FD_TOL: f64 = 1e-5;
const PROX_TOL: f64 = 1e-10;
const BIAS_DRAWS: u64 = 4000;
const CHECK_STREAM: u64 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: impl Into<String>, passed: bool, detail: String) -> Self {
        CheckResult {
            name: name.into(),
            passed,
            detail,
        }
    }
}

/// IFO count a run of `k` iterations must report.
pub fn closed_form_ifo(kind: SolverKind, k: usize, n: usize, s: &Schedule) -> u64 {
    let (k, n) = (k as u64, n as u64);
    let (b, q, m, b1) = (s.batch as u64, s.period as u64, s.epoch_len as u64, s.online_batch as u64);
    match kind {
        SolverKind::Deterministic => ifo_total_deterministic(k, n),
        SolverKind::Spider => ifo_total_spider(k, n, q, b),
        SolverKind::SpiderOnline => ifo_total_online(k, b1, q, b),
        SolverKind::Svrg => ifo_total_svrg(k, n, m, b),
        SolverKind::Saga => ifo_total_saga(k, n, b),
        SolverKind::Sgd => ifo_total_sgd(k, b),
    }
}

pub fn run_checks<L: SmoothLoss>(problem: &CompositeProblem<L>, seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = gradient_checks(problem.loss(), seed)?;
    out.extend(prox_checks(problem, seed)?);
    out.extend(estimator_checks(problem.loss(), seed));
    out.extend(ifo_checks(problem, seed)?);
    Ok(out)
}

fn gradient_checks<L: SmoothLoss>(loss: &L, seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = SeededRng::new(seed, CHECK_STREAM);
    let mut worst = 0.0_f64;
    for _ in 0..5 {
        let x: Vec<f64> = rng.normal_vec(loss.dim()).iter().map(|v| 0.5 * v).collect();
        worst = worst.max(finite_diff_check(loss, &x, FD_STEP)?);
    }
    Ok(vec![CheckResult::new(
        "gradient-finite-difference",
        worst <= FD_TOL,
        format!("max relative error {worst:.2e} (tolerance {FD_TOL:.0e})"),
    )])
}

fn prox_checks<L: SmoothLoss>(problem: &CompositeProblem<L>, seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = SeededRng::new(seed, CHECK_STREAM + 1);
    let mut out = Vec::new();
    for (j, block) in problem.blocks().iter().enumerate() {
        let dim = block.op.cols();
        let mut worst = 0.0_f64;
        for _ in 0..20 {
            let w = rng.normal_vec(dim);
            let r = 0.5 + 2.0 * rng.uniform();
            let y = block.reg.prox(&w, r)?;
            let t: Vec<f64> = w.iter().zip(&y).map(|(wi, yi)| r * (wi - yi)).collect();
            worst = worst.max(block.reg.min_subgrad_dist_sq(&y, &t)?);
        }
        out.push(CheckResult::new(
            format!("prox-optimality-block{j}"),
            worst <= PROX_TOL,
            format!("max dist(r(w - y), dg(y))^2 = {worst:.2e}"),
        ));
    }
    Ok(out)
}

/// Mean of the draws lies within 4 standard errors of the full gradient.
fn bias_check(name: &str, draws: &[Vec<f64>], truth: &[f64]) -> CheckResult {
    let n = draws.len() as f64;
    let mut mean = vec![0.0; truth.len()];
    for d in draws {
        for (m, v) in mean.iter_mut().zip(d) {
            *m += v / n;
        }
    }
    let spread = (draws.iter().map(|d| dist_sq(d, &mean)).sum::<f64>() / (n - 1.0)).sqrt();
    let err = dist_sq(&mean, truth).sqrt();
    let bound = 4.0 * spread / n.sqrt();
    CheckResult::new(
        format!("{name}-unbiased"),
        err <= bound.max(1e-12),
        format!("bias {err:.2e}, bound {bound:.2e}"),
    )
}

fn estimator_checks<L: SmoothLoss>(loss: &L, seed: u64) -> Vec<CheckResult> {
    let d = loss.dim();
    let n = loss.num_samples();
    let b = n.clamp(1, 8);
    let mut rng = SeededRng::new(seed, CHECK_STREAM + 2);
    let x0: Vec<f64> = rng.normal_vec(d).iter().map(|v| 0.1 * v).collect();
    let x1: Vec<f64> = x0.iter().zip(rng.normal_vec(d)).map(|(a, v)| a + 0.1 * v).collect();
    let truth = loss.full_grad(&x1);
    let mut ifo = IfoCounter::new();
    let replay = |i: u64| SeededRng::new(seed.wrapping_add(i), CHECK_STREAM + 3);

    let mut spider = SpiderState::new(d, 2, b).expect("valid spider schedule");
    spider.step(loss, &x0, &mut rng, &mut ifo);
    let draws: Vec<Vec<f64>> = (0..BIAS_DRAWS)
        .map(|i| spider.clone().step(loss, &x1, &mut replay(i), &mut IfoCounter::new()).to_vec())
        .collect();
    let mut out = vec![bias_check("spider", &draws, &truth)];

    let mut svrg = SvrgState::new(d, 2, b).expect("valid svrg schedule");
    svrg.step(loss, &x0, &mut rng, &mut ifo);
    let draws: Vec<Vec<f64>> = (0..BIAS_DRAWS)
        .map(|i| svrg.clone().step(loss, &x1, &mut replay(i), &mut IfoCounter::new()))
        .collect();
    out.push(bias_check("svrg", &draws, &truth));

    let saga = SagaState::new(loss, &x0, b, &mut ifo).expect("valid saga schedule");
    let draws: Vec<Vec<f64>> = (0..BIAS_DRAWS)
        .map(|i| saga.clone().step(loss, &x1, &mut replay(i), &mut IfoCounter::new()))
        .collect();
    out.push(bias_check("saga", &draws, &truth));
    out
}

fn ifo_checks<L: SmoothLoss>(problem: &CompositeProblem<L>, seed: u64) -> Result<Vec<CheckResult>> {
    let n = problem.loss().num_samples();
    let mut out = Vec::new();
    for kind in SolverKind::ALL {
        let hp = HyperParams {
            iterations: 12,
            seed,
            ..HyperParams::default()
        };
        let trace = run(problem, &hp, kind, &mut Silent)?;
        let k = trace.records.len();
        let got = trace.records.last().map_or(trace.initial.ifo, |r| r.ifo);
        let want = closed_form_ifo(kind, k, n, &trace.header.schedule);
        out.push(CheckResult::new(
            format!("ifo-{}", kind.name()),
            got == want,
            format!("{k} iterations: counted {got}, closed form {want}"),
        ));
    }
    Ok(out)
}
