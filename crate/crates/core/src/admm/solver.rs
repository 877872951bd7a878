use alloc::vec;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use super::{
    derive_hyperparams, resolve_schedule, update_x, update_y_block, update_z, CompositeProblem, DerivedSpectra,
    HyperParams, IterateState, Schedule, SolverKind,
};
use crate::diagnostics::{
    augmented_lagrangian, lyapunov_value, nu_constants, online_floor_estimate, saga_beta, saga_c_schedule,
    stationarity_sq, svrg_c_schedule, theta_surrogate, LyapunovConstants, LyapunovWindow, NuConstants, ThetaWindow,
};
use crate::error::{check_dim, Error, Result};
use crate::estimators::{saga_inclusion_probability, SagaState, SpiderOnlineState, SpiderState, SvrgState};
use crate::linalg::{all_finite, dist_sq, norm, SeededRng};
use crate::losses::{ResampledStream, SampleStream, SmoothLoss};

/// RNG stream used for `x₀`, `y⁰`.
pub const INIT_STREAM: u64 = 0;
/// RNG stream used for minibatch draws.
pub const BATCH_STREAM: u64 = 1;
/// RNG stream used to pick the random output iterate.
pub const OUTPUT_STREAM: u64 = 2;

/// Diagnostics after one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// Completed iterations (1-based).
    pub iter: usize,
    /// Refresh period (SPIDER), outer epoch (SVRG) or data pass (SAGA, SGD).
    pub epoch: usize,
    /// `f(x) + Σ g_j(y_j)`
    pub objective: f64,
    pub aug_lagrangian: f64,
    /// `‖Ax + ΣB_j y_j − c‖`
    pub residual: f64,
    pub theta: f64,
    pub stationarity: Option<f64>,
    pub lyapunov: Option<f64>,
    pub ifo: u64,
    pub seconds: f64,
}

/// Diagnostics at the starting point.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialRecord {
    pub objective: f64,
    pub aug_lagrangian: f64,
    pub residual: f64,
    pub stationarity: Option<f64>,
    pub lyapunov: Option<f64>,
    pub ifo: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceHeader {
    pub kind: SolverKind,
    /// False for the plain-SGD baseline, whose step rule is a heuristic.
    pub faithful: bool,
    pub sample_source: &'static str,
    pub seed: u64,
    pub spectra: DerivedSpectra,
    pub schedule: Schedule,
    pub nu: NuConstants,
    /// Online variant: `w` evaluated at the observed `δ` (an estimate, not a bound).
    pub online_floor_estimate: Option<f64>,
    pub stopped_early: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub header: TraceHeader,
    pub initial: InitialRecord,
    pub records: Vec<TraceRecord>,
    pub last: IterateState,
    /// Last iterate, or a uniformly random one when requested.
    pub output: IterateState,
}

/// Observes a run; may stop it early and supplies wall-clock time.
pub trait Monitor {
    /// Seconds since the run started.
    fn seconds(&mut self) -> f64 {
        0.0
    }

    fn observe(&mut self, _record: &TraceRecord, _state: &IterateState) -> ControlFlow<()> {
        ControlFlow::Continue(())
    }
}

/// Monitor that never stops and reports zero time.
#[derive(Debug, Clone, Copy, Default)]
pub struct Silent;

impl Monitor for Silent {}

/// Runs one solver on a finite-sum problem. The online variant resamples the dataset.
pub fn run<L: SmoothLoss, M: Monitor>(
    problem: &CompositeProblem<L>,
    hp: &HyperParams,
    kind: SolverKind,
    monitor: &mut M,
) -> Result<Trace> {
    let stream = ResampledStream::new(problem.loss());
    drive(problem, &stream, hp, kind, monitor)
}

/// Online SPIDER-ADMM drawing fresh samples from `stream`. The problem's loss
/// is used only to report objective values.
pub fn run_online<L: SmoothLoss, S: SampleStream, M: Monitor>(
    problem: &CompositeProblem<L>,
    stream: &S,
    hp: &HyperParams,
    monitor: &mut M,
) -> Result<Trace> {
    if hp.stationarity {
        return Err(Error::Capability(
            "exact stationarity needs a full gradient, which a sample stream cannot provide; use theta".into(),
        ));
    }
    check_dim(problem.dim(), stream.dim())?;
    drive(problem, stream, hp, SolverKind::SpiderOnline, monitor)
}

enum Engine {
    Full,
    Spider(SpiderState),
    Online(SpiderOnlineState),
    Svrg(SvrgState),
    Saga(SagaState),
    Sgd(usize),
}

fn drive<L: SmoothLoss, S: SampleStream, M: Monitor>(
    problem: &CompositeProblem<L>,
    stream: &S,
    hp: &HyperParams,
    kind: SolverKind,
    monitor: &mut M,
) -> Result<Trace> {
    let loss = problem.loss();
    let n = loss.num_samples();
    let d = problem.dim();
    let schedule = resolve_schedule(n, hp, kind)?;
    let mut spectra = derive_hyperparams(problem, hp, kind)?;
    let nu = nu_constants(kind, &spectra);
    let k_total = schedule.iterations;

    let mut state = IterateState::initial(problem, &mut SeededRng::new(hp.seed, INIT_STREAM));
    let mut rng = SeededRng::new(hp.seed, BATCH_STREAM);
    let mut output_rng = SeededRng::new(hp.seed, OUTPUT_STREAM);

    let mut engine = match kind {
        SolverKind::Deterministic => Engine::Full,
        SolverKind::Spider => Engine::Spider(SpiderState::new(d, schedule.period, schedule.batch)?),
        SolverKind::SpiderOnline => Engine::Online(SpiderOnlineState::new(
            d,
            schedule.online_batch,
            schedule.batch,
            schedule.period,
        )?),
        SolverKind::Svrg => Engine::Svrg(SvrgState::new(d, schedule.epoch_len, schedule.batch)?),
        SolverKind::Saga => Engine::Saga(SagaState::new(loss, &state.x, schedule.batch, &mut state.ifo)?),
        SolverKind::Sgd => Engine::Sgd(schedule.batch),
    };
    let q = match kind {
        SolverKind::Spider | SolverKind::SpiderOnline => schedule.period,
        _ => 1,
    };

    let consts = LyapunovConstants::new(&spectra, schedule.batch, hp.lyapunov_kappa_a);
    let c_schedule = match kind {
        SolverKind::Svrg => svrg_c_schedule(consts.c_increment(), schedule.epoch_len),
        SolverKind::Saga => saga_c_schedule(
            consts.c_increment(),
            saga_inclusion_probability(n, schedule.batch),
            saga_beta(n, schedule.batch),
            k_total,
        ),
        _ => Vec::new(),
    };
    let track_lyapunov = hp.lyapunov && kind != SolverKind::Sgd;
    if hp.lyapunov && !track_lyapunov {
        log::warn!("no Lyapunov function is defined for {kind}; column left empty");
    }

    let lag0 = augmented_lagrangian(problem, &state, spectra.rho)?;
    let initial = InitialRecord {
        objective: problem.objective(&state.x, &state.y)?,
        aug_lagrangian: lag0,
        residual: norm(&problem.residual(&state.x, &state.y)),
        stationarity: if hp.stationarity {
            Some(stationarity_sq(problem, &state)?.total_sq)
        } else {
            None
        },
        lyapunov: track_lyapunov.then_some(lag0),
        ifo: state.ifo.count(),
    };

    let mut records = Vec::with_capacity(k_total);
    let mut output = state.clone();
    let mut x_lag = state.x.clone();
    let mut prev_step_sq = 0.0;
    let mut period_steps: Vec<f64> = Vec::with_capacity(q);
    let mut table_dist = 0.0;
    let mut prev_table_dist = 0.0;
    let mut delta: f64 = 0.0;
    let mut stopped_early = false;

    for k in 0..k_total {
        let v = match &mut engine {
            Engine::Full => {
                let g = loss.full_grad(&state.x);
                state.ifo.charge(n);
                g
            }
            Engine::Spider(s) => s.step(loss, &state.x, &mut rng, &mut state.ifo).to_vec(),
            Engine::Online(s) => s.step(stream, &state.x, &mut rng, &mut state.ifo).to_vec(),
            Engine::Svrg(s) => s.step(loss, &state.x, &mut rng, &mut state.ifo),
            Engine::Saga(s) => s.step(loss, &state.x, &mut rng, &mut state.ifo),
            Engine::Sgd(b) => {
                let idx: Vec<usize> = (0..*b).map(|_| rng.index(n)).collect();
                let mut g = vec![0.0; d];
                loss.minibatch_grad_into(&state.x, &idx, &mut g);
                state.ifo.charge(*b);
                g
            }
        };
        delta = delta.max(norm(&v));

        let mut y_step_sq = 0.0;
        for j in 0..problem.num_blocks() {
            let yj = update_y_block(problem, &spectra, &state, j)?;
            y_step_sq += dist_sq(&yj, &state.y[j]);
            state.y[j] = yj;
        }
        let x_new = update_x(problem, &spectra, &state, &v);
        debug_assert!({
            let r = super::x_optimality_residual(problem, &spectra, &state.x, &x_new, &state.y, &state.z, &v);
            r <= 1e-8 * (1.0 + norm(&v))
        });
        let x_old = core::mem::replace(&mut state.x, x_new);
        let (z_new, res) = update_z(problem, &spectra, &state);
        state.z = z_new;
        state.v = v;
        state.k = k + 1;
        if !all_finite(&state.x) || !all_finite(&state.z) || state.y.iter().any(|y| !all_finite(y)) {
            return Err(Error::Divergence {
                iteration: k + 1,
                rho: spectra.rho,
                eta: spectra.eta,
            });
        }

        let step_sq = dist_sq(&state.x, &x_old);
        if k % q == 0 {
            period_steps.clear();
        }
        period_steps.push(step_sq);
        let aug = augmented_lagrangian(problem, &state, spectra.rho)?;

        let (theta, window) = match &engine {
            Engine::Svrg(s) => {
                let snap = s.snapshot();
                let cur = dist_sq(&x_old, snap);
                let lagged = dist_sq(&x_lag, snap);
                let theta = theta_surrogate(&ThetaWindow::Svrg {
                    next_step_sq: step_sq,
                    prev_step_sq,
                    snapshot_dist_sq: cur,
                    prev_snapshot_dist_sq: lagged,
                    b: schedule.batch,
                    y_step_sq,
                })?;
                let t_next = s.inner_index();
                let t_next = if t_next == 0 { schedule.epoch_len } else { t_next };
                let w = LyapunovWindow::Svrg {
                    aug_lagrangian: aug,
                    last_step_sq: step_sq,
                    prev_snapshot_dist_sq: cur,
                    snapshot_dist_sq: dist_sq(&state.x, snap),
                    c_t: c_schedule[t_next],
                };
                (theta, w)
            }
            Engine::Saga(s) => {
                let theta = theta_surrogate(&ThetaWindow::Saga {
                    next_step_sq: step_sq,
                    prev_step_sq,
                    table_dist_sq: table_dist,
                    prev_table_dist_sq: prev_table_dist,
                    b: schedule.batch,
                    y_step_sq,
                })?;
                let next_dist = s.mean_table_dist_sq(&state.x);
                let w = LyapunovWindow::Saga {
                    aug_lagrangian: aug,
                    last_step_sq: step_sq,
                    prev_table_dist_sq: table_dist,
                    table_dist_sq: next_dist,
                    c_t: c_schedule[k + 1],
                };
                prev_table_dist = table_dist;
                table_dist = next_dist;
                (theta, w)
            }
            _ => {
                let theta = theta_surrogate(&ThetaWindow::Spider {
                    next_step_sq: step_sq,
                    prev_step_sq,
                    period_steps_sq: &period_steps,
                    q,
                    y_step_sq,
                })?;
                let period_sum_sq = if (k + 1) % q == 0 { 0.0 } else { period_steps.iter().sum() };
                let w = LyapunovWindow::Spider {
                    aug_lagrangian: aug,
                    last_step_sq: step_sq,
                    period_sum_sq,
                };
                (theta, w)
            }
        };
        let lyapunov = if track_lyapunov {
            Some(lyapunov_value(kind, &window, &consts)?)
        } else {
            None
        };
        let stationarity = if hp.stationarity {
            Some(stationarity_sq(problem, &state)?.total_sq)
        } else {
            None
        };
        let epoch = match &engine {
            Engine::Spider(_) | Engine::Online(_) => k / q + 1,
            Engine::Full => k + 1,
            Engine::Svrg(s) => s.epoch(),
            Engine::Saga(_) | Engine::Sgd(_) => ((k + 1) * schedule.batch).div_ceil(n),
        };
        let objective = problem.objective(&state.x, &state.y)?;
        if !objective.is_finite() || !aug.is_finite() {
            return Err(Error::Divergence {
                iteration: k + 1,
                rho: spectra.rho,
                eta: spectra.eta,
            });
        }
        let record = TraceRecord {
            iter: k + 1,
            epoch,
            objective,
            aug_lagrangian: aug,
            residual: norm(&res),
            theta,
            stationarity,
            lyapunov,
            ifo: state.ifo.count(),
            seconds: monitor.seconds(),
        };

        x_lag = x_old;
        prev_step_sq = step_sq;
        if hp.random_output && output_rng.index(k + 1) == 0 {
            output = state.clone();
        }
        let flow = monitor.observe(&record, &state);
        records.push(record);
        if flow.is_break() || hp.early_stop_theta.is_some_and(|tol| theta < tol) {
            stopped_early = state.k < k_total;
            break;
        }
    }

    spectra.delta_estimate = Some(delta);
    let online_floor = (kind == SolverKind::SpiderOnline)
        .then(|| online_floor_estimate(delta, spectra.sigma_a_min, spectra.rho));
    if !hp.random_output {
        output = state.clone();
    }
    Ok(Trace {
        header: TraceHeader {
            kind,
            faithful: kind.is_faithful(),
            sample_source: stream.describe(),
            seed: hp.seed,
            spectra,
            schedule,
            nu,
            online_floor_estimate: online_floor,
            stopped_early,
        },
        initial,
        records,
        last: state,
        output,
    })
}
