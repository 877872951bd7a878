//! Runs every (solver, seed) pair of a config and writes traces plus a summary.

use std::fs;
use std::ops::ControlFlow;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use vradmm_core::admm::{run, CompositeProblem, IterateState, Monitor, SolverKind, Trace, TraceRecord};
use vradmm_core::diagnostics::stationarity_sq;
use vradmm_core::losses::{MultitaskLoss, SampleSet, SigmoidLoss, SmoothLoss};

use crate::builders::{build_graph_problem, build_multitask_problem};
use crate::config::{DataSource, ExperimentConfig, ProblemSpec};
use crate::error::{io_err, Result};
use crate::graph::{edge_matrix, fusion_edges};
use crate::io::{parse_edge_list, parse_libsvm};
use crate::synth::{binary_dataset, multiclass_dataset};
use crate::trace::write_trace_csv;

/// Slack allowed on `R_{k+1} ≤ R_k` before a step counts as a violation.
pub const LYAPUNOV_SLACK: f64 = 1e-10;

pub enum Problem {
    Graph(CompositeProblem<SigmoidLoss>),
    Multitask(CompositeProblem<MultitaskLoss>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInfo {
    pub kind: String,
    pub samples: usize,
    pub features: usize,
    /// Graph problem only.
    pub edges: Option<usize>,
    pub mu: Option<f64>,
}

pub fn load_samples(data: &DataSource) -> Result<SampleSet> {
    Ok(match data {
        DataSource::Libsvm(path) => parse_libsvm(path)?,
        DataSource::SyntheticBinary(spec) => binary_dataset(spec)?.0,
        DataSource::SyntheticMulticlass(spec) => multiclass_dataset(spec)?.0,
    })
}

pub fn build_problem(cfg: &ExperimentConfig) -> Result<(Problem, ProblemInfo)> {
    let samples = load_samples(&cfg.data)?;
    let (n, d) = (samples.len(), samples.dim());
    Ok(match &cfg.problem {
        ProblemSpec::Graph(g) => {
            let edges = match &g.edges {
                Some(path) => parse_edge_list(path, d)?,
                None => fusion_edges(&samples, g.threshold)?,
            };
            let e = edge_matrix(&edges, d)?;
            let info = ProblemInfo {
                kind: "graph".into(),
                samples: n,
                features: d,
                edges: Some(e.rows()),
                mu: Some(g.mu),
            };
            (Problem::Graph(build_graph_problem(samples, &e, g.lambda, g.mu)?), info)
        }
        ProblemSpec::Multitask(m) => {
            let info = ProblemInfo {
                kind: "multitask".into(),
                samples: n,
                features: d,
                edges: None,
                mu: None,
            };
            let p = build_multitask_problem(samples, m.lambda1, m.lambda2, m.alpha_ls, m.beta_ls)?;
            (Problem::Multitask(p), info)
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectraSummary {
    pub lipschitz: f64,
    pub sigma_a_min: f64,
    pub sigma_a_max: f64,
    pub sigma_b_max: f64,
    pub rho: f64,
    pub eta: f64,
    pub r: f64,
    pub kappa_g: f64,
    pub kappa_a: f64,
    pub nu_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSummary {
    pub iterations: usize,
    pub batch: usize,
    pub period: usize,
    pub epoch_len: usize,
    pub online_batch: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub solver: String,
    pub seed: u64,
    pub csv: String,
    /// False for the SGD baseline.
    pub faithful: Option<bool>,
    pub error: Option<String>,
    pub iterations: usize,
    pub stopped_early: bool,
    pub final_objective: Option<f64>,
    pub final_residual: Option<f64>,
    pub final_stationarity: Option<f64>,
    pub ifo_total: u64,
    pub target: Option<f64>,
    pub ifo_to_target: Option<u64>,
    pub lyapunov_violations: Option<usize>,
    pub lyapunov_max_increase: Option<f64>,
    pub spectra: Option<SpectraSummary>,
    pub schedule: Option<ScheduleSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub solver: String,
    pub runs: usize,
    pub failed: usize,
    pub reached_target: usize,
    /// Median over seeds; runs that never reach the target count as infinite.
    pub median_ifo_to_target: Option<f64>,
    pub median_final_stationarity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config_hash: String,
    pub problem: ProblemInfo,
    pub target_tolerance: f64,
    pub solvers: Vec<SolverSummary>,
    pub runs: Vec<RunSummary>,
}

/// Summary plus the in-memory traces, in config order.
pub struct ExperimentOutput {
    pub summary: Summary,
    pub traces: Vec<(SolverKind, u64, Vec<TraceRecord>)>,
}

/// Collects records, keeps time and watches for the objective target.
struct Recorder {
    start: Instant,
    target: Option<f64>,
    stop_at_target: bool,
    hit: Option<u64>,
    rows: Vec<TraceRecord>,
}

impl Recorder {
    fn new(target: Option<f64>, stop_at_target: bool) -> Self {
        Recorder {
            start: Instant::now(),
            target,
            stop_at_target,
            hit: None,
            rows: Vec::new(),
        }
    }
}

impl Monitor for Recorder {
    fn seconds(&mut self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    fn observe(&mut self, record: &TraceRecord, _state: &IterateState) -> ControlFlow<()> {
        self.rows.push(record.clone());
        if self.hit.is_none() && self.target.is_some_and(|t| record.objective <= t) {
            self.hit = Some(record.ifo);
            if self.stop_at_target {
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    }
}

struct Job {
    kind: SolverKind,
    seed: u64,
    target: Option<f64>,
    stop: bool,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let (problem, info) = build_problem(cfg)?;
    match &problem {
        Problem::Graph(p) => execute(p, cfg, info),
        Problem::Multitask(p) => execute(p, cfg, info),
    }
}

fn execute<L: SmoothLoss + Sync>(
    problem: &CompositeProblem<L>,
    cfg: &ExperimentConfig,
    info: ProblemInfo,
) -> Result<ExperimentOutput> {
    fs::create_dir_all(&cfg.out_dir).map_err(io_err(&cfg.out_dir))?;
    let tol = cfg.target.tolerance;
    let has_reference = cfg.solvers.iter().any(|s| s.solver.0 == SolverKind::Deterministic);
    let fixed_target = cfg.target.objective.map(|o| o + tol);

    // The deterministic runs come first when they define the per-seed target.
    let mut finished: Vec<(Job, RunOutcome)> = Vec::new();
    if has_reference && fixed_target.is_none() {
        let jobs: Vec<Job> = cfg
            .seeds
            .iter()
            .map(|&seed| Job {
                kind: SolverKind::Deterministic,
                seed,
                target: None,
                stop: false,
            })
            .collect();
        finished.extend(run_jobs(problem, cfg, jobs));
    }
    let reference = |seed: u64| -> Option<f64> {
        fixed_target.or_else(|| {
            finished
                .iter()
                .find(|(j, _)| j.seed == seed && j.kind == SolverKind::Deterministic)
                .and_then(|(_, o)| o.trace.as_ref().map(|t| final_objective(t) + tol))
        })
    };
    let jobs: Vec<Job> = cfg
        .solvers
        .iter()
        .filter(|s| !(s.solver.0 == SolverKind::Deterministic && finished.iter().any(|(j, _)| j.kind == s.solver.0)))
        .flat_map(|s| {
            cfg.seeds.iter().map(|&seed| Job {
                kind: s.solver.0,
                seed,
                target: reference(seed),
                stop: cfg.target.stop_at_target && s.solver.0 != SolverKind::Deterministic,
            })
        })
        .collect();
    let targets: Vec<(u64, Option<f64>)> = cfg.seeds.iter().map(|&s| (s, reference(s))).collect();
    finished.extend(run_jobs(problem, cfg, jobs));

    let order = |k: SolverKind| cfg.solvers.iter().position(|s| s.solver.0 == k).unwrap_or(usize::MAX);
    let seed_pos = |s: u64| cfg.seeds.iter().position(|&t| t == s).unwrap_or(usize::MAX);
    finished.sort_by_key(|(j, _)| (order(j.kind), seed_pos(j.seed)));

    let mut runs = Vec::with_capacity(finished.len());
    let mut traces = Vec::with_capacity(finished.len());
    for (job, outcome) in finished {
        let target = targets.iter().find(|(s, _)| *s == job.seed).and_then(|(_, t)| *t);
        let csv = format!("{}-seed{}.csv", job.kind.name(), job.seed);
        write_trace_csv(&outcome.rows, cfg.out_dir.join(&csv))?;
        let summary = summarize(problem, &job, &outcome, target, csv)?;
        log::info!(
            "{} seed {}: {} iterations, objective {:?}, ifo-to-target {:?}",
            summary.solver,
            summary.seed,
            summary.iterations,
            summary.final_objective,
            summary.ifo_to_target
        );
        runs.push(summary);
        traces.push((job.kind, job.seed, outcome.rows));
    }

    let solvers = cfg
        .solvers
        .iter()
        .map(|s| solver_summary(s.solver.0, &runs))
        .collect();
    let summary = Summary {
        config_hash: cfg.hash(),
        problem: info,
        target_tolerance: tol,
        solvers,
        runs,
    };
    write_summary(&summary, &cfg.out_dir.join("summary.json"))?;
    Ok(ExperimentOutput { summary, traces })
}

struct RunOutcome {
    trace: Option<Trace>,
    error: Option<String>,
    rows: Vec<TraceRecord>,
    hit: Option<u64>,
}

fn run_jobs<L: SmoothLoss + Sync>(
    problem: &CompositeProblem<L>,
    cfg: &ExperimentConfig,
    jobs: Vec<Job>,
) -> Vec<(Job, RunOutcome)> {
    jobs.into_par_iter()
        .map(|job| {
            let spec = cfg
                .solvers
                .iter()
                .find(|s| s.solver.0 == job.kind)
                .expect("job solvers come from the config");
            let mut hp = cfg.solver_hyper(spec).to_hyperparams(job.seed);
            hp.stationarity = cfg.stationarity;
            hp.lyapunov = cfg.lyapunov && job.kind != SolverKind::Sgd;
            let mut rec = Recorder::new(job.target, job.stop);
            let outcome = match run(problem, &hp, job.kind, &mut rec) {
                Ok(trace) => RunOutcome {
                    rows: trace.records.clone(),
                    trace: Some(trace),
                    error: None,
                    hit: rec.hit,
                },
                Err(e) => {
                    log::warn!("{} seed {} failed: {e}", job.kind, job.seed);
                    RunOutcome {
                        trace: None,
                        error: Some(e.to_string()),
                        rows: rec.rows,
                        hit: rec.hit,
                    }
                }
            };
            (job, outcome)
        })
        .collect()
}

fn final_objective(t: &Trace) -> f64 {
    t.records.last().map_or(t.initial.objective, |r| r.objective)
}

fn summarize<L: SmoothLoss>(
    problem: &CompositeProblem<L>,
    job: &Job,
    outcome: &RunOutcome,
    target: Option<f64>,
    csv: String,
) -> Result<RunSummary> {
    let rows = &outcome.rows;
    // The reference runs never had a live target; scan their rows instead.
    let ifo_to_target = outcome
        .hit
        .or_else(|| target.and_then(|t| rows.iter().find(|r| r.objective <= t).map(|r| r.ifo)));
    let (violations, max_increase) = lyapunov_stats(outcome.trace.as_ref());
    let mut s = RunSummary {
        solver: job.kind.name().into(),
        seed: job.seed,
        csv,
        faithful: None,
        error: outcome.error.clone(),
        iterations: rows.len(),
        stopped_early: false,
        final_objective: rows.last().map(|r| r.objective),
        final_residual: rows.last().map(|r| r.residual),
        final_stationarity: None,
        ifo_total: rows.last().map_or(0, |r| r.ifo),
        target,
        ifo_to_target,
        lyapunov_violations: violations,
        lyapunov_max_increase: max_increase,
        spectra: None,
        schedule: None,
    };
    if let Some(t) = &outcome.trace {
        let h = &t.header;
        s.faithful = Some(h.faithful);
        s.stopped_early = h.stopped_early || rows.len() < h.schedule.iterations;
        s.final_stationarity = Some(stationarity_sq(problem, &t.last)?.total_sq);
        s.spectra = Some(SpectraSummary {
            lipschitz: h.spectra.lipschitz,
            sigma_a_min: h.spectra.sigma_a_min,
            sigma_a_max: h.spectra.sigma_a_max,
            sigma_b_max: h.spectra.sigma_b_max,
            rho: h.spectra.rho,
            eta: h.spectra.eta,
            r: h.spectra.r,
            kappa_g: h.spectra.kappa_g,
            kappa_a: h.spectra.kappa_a,
            nu_max: h.nu.max(),
        });
        s.schedule = Some(ScheduleSummary {
            iterations: h.schedule.iterations,
            batch: h.schedule.batch,
            period: h.schedule.period,
            epoch_len: h.schedule.epoch_len,
            online_batch: h.schedule.online_batch,
        });
    }
    Ok(s)
}

fn lyapunov_stats(trace: Option<&Trace>) -> (Option<usize>, Option<f64>) {
    let Some(t) = trace else { return (None, None) };
    let Some(mut prev) = t.initial.lyapunov else { return (None, None) };
    let mut count = 0;
    let mut worst = f64::NEG_INFINITY;
    for r in &t.records {
        let cur = r.lyapunov.expect("tracked from the start");
        let inc = cur - prev;
        worst = worst.max(inc);
        if inc > LYAPUNOV_SLACK {
            count += 1;
        }
        prev = cur;
    }
    (Some(count), worst.is_finite().then_some(worst))
}

/// Median with `None` read as +∞; an infinite median becomes `None`.
pub fn median(values: &[Option<f64>]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v: Vec<f64> = values.iter().map(|x| x.unwrap_or(f64::INFINITY)).collect();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    let med = if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) };
    med.is_finite().then_some(med)
}

fn solver_summary(kind: SolverKind, runs: &[RunSummary]) -> SolverSummary {
    let mine: Vec<&RunSummary> = runs.iter().filter(|r| r.solver == kind.name()).collect();
    let ifo: Vec<Option<f64>> = mine.iter().map(|r| r.ifo_to_target.map(|v| v as f64)).collect();
    let stat: Vec<Option<f64>> = mine.iter().map(|r| r.final_stationarity).collect();
    SolverSummary {
        solver: kind.name().into(),
        runs: mine.len(),
        failed: mine.iter().filter(|r| r.error.is_some()).count(),
        reached_target: mine.iter().filter(|r| r.ifo_to_target.is_some()).count(),
        median_ifo_to_target: median(&ifo),
        median_final_stationarity: median(&stat),
    }
}

fn write_summary(summary: &Summary, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

pub fn read_summary(path: impl AsRef<Path>) -> Result<Summary> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(serde_json::from_str(&text)?)
}
