use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use vradmm_bench::checks::run_checks;
use vradmm_bench::config::{DataSource, ExperimentConfig, ProblemSpec, SolverSpec};
use vradmm_bench::experiment::{build_problem, load_samples, run_experiment, Problem};
use vradmm_bench::graph::{canonical_edges, fusion_edges, DEFAULT_THRESHOLD};
use vradmm_bench::io::write_edge_list;
use vradmm_core::admm::SolverKind;

/// Variance-reduced stochastic ADMM solvers and benchmarks.
#[derive(Parser)]
#[command(name = "vradmm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver on one problem.
    Solve(Shared),
    /// Run every solver and seed of a config.
    Bench(Shared),
    /// Gradient, prox, estimator and IFO property checks on a problem.
    Check(Shared),
    /// Build the correlation fusion graph and write it as an edge list.
    Graph(GraphArgs),
}

#[derive(Args)]
struct Shared {
    /// JSON experiment config; without one a small synthetic graph problem is used.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for traces and summary.json.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    solver: Option<SolverKind>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    iters: Option<usize>,
    /// Track the Lyapunov function along the run.
    #[arg(long)]
    lyapunov: bool,
    /// Iterate the penalty formula to its fixed point.
    #[arg(long)]
    theory_rho: bool,
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long, conflicts_with = "libsvm")]
    config: Option<PathBuf>,
    /// LIBSVM dataset to build the graph from.
    #[arg(long)]
    libsvm: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Edge-list file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Shared {
    fn config(&self, single: bool) -> anyhow::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
            None => ExperimentConfig::example_graph(200, 10),
        };
        if let Some(kind) = self.solver {
            let keep = cfg.solvers.iter().find(|s| s.solver.0 == kind).cloned();
            cfg.solvers = vec![keep.unwrap_or_else(|| SolverSpec::new(kind))];
        } else if single {
            let first = cfg.solvers.first().cloned().unwrap_or_else(|| SolverSpec::new(SolverKind::Spider));
            cfg.solvers = vec![first];
        }
        if let Some(seed) = self.seed {
            cfg.seeds = vec![seed];
        } else if single {
            cfg.seeds.truncate(1);
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        // Flags beat both the config defaults and per-solver settings.
        for h in std::iter::once(&mut cfg.defaults).chain(cfg.solvers.iter_mut().map(|s| &mut s.hyper)) {
            h.alpha = self.alpha.or(h.alpha);
            h.rho = self.rho.or(h.rho);
            h.eta = self.eta.or(h.eta);
            if self.iters.is_some() {
                h.iterations = self.iters;
                h.epochs = None;
            }
            if self.theory_rho {
                h.theory_rho = Some(true);
            }
        }
        cfg.lyapunov |= self.lyapunov;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn bench(cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let out = run_experiment(cfg)?;
    for s in &out.summary.solvers {
        println!(
            "{:<14} runs {} failed {} reached {}  median ifo-to-target {}  median stationarity {}",
            s.solver,
            s.runs,
            s.failed,
            s.reached_target,
            fmt_opt(s.median_ifo_to_target),
            fmt_opt(s.median_final_stationarity)
        );
    }
    println!("wrote {}", cfg.out_dir.join("summary.json").display());
    Ok(())
}

fn solve(cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let out = run_experiment(cfg)?;
    for r in &out.summary.runs {
        if let Some(msg) = &r.error {
            bail!("{} seed {} failed: {msg}", r.solver, r.seed);
        }
        println!(
            "{} seed {}: {} iterations, objective {}, residual {}, stationarity {}, ifo {}",
            r.solver,
            r.seed,
            r.iterations,
            fmt_opt(r.final_objective),
            fmt_opt(r.final_residual),
            fmt_opt(r.final_stationarity),
            r.ifo_total
        );
        println!("trace {}", cfg.out_dir.join(&r.csv).display());
    }
    Ok(())
}

fn check(cfg: &ExperimentConfig) -> anyhow::Result<bool> {
    let seed = cfg.seeds[0];
    let (problem, info) = build_problem(cfg)?;
    println!("{} problem: n={} d={}", info.kind, info.samples, info.features);
    let results = match &problem {
        Problem::Graph(p) => run_checks(p, seed)?,
        Problem::Multitask(p) => run_checks(p, seed)?,
    };
    let mut ok = true;
    for r in &results {
        ok &= r.passed;
        println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    Ok(ok)
}

fn graph(args: &GraphArgs) -> anyhow::Result<()> {
    let (data, threshold) = match (&args.config, &args.libsvm) {
        (Some(path), None) => {
            let cfg = ExperimentConfig::load(path)?;
            let t = match &cfg.problem {
                ProblemSpec::Graph(g) => g.threshold,
                ProblemSpec::Multitask(_) => args.threshold,
            };
            (cfg.data, t)
        }
        (None, Some(path)) => (DataSource::Libsvm(path.clone()), args.threshold),
        _ => bail!("graph needs --config or --libsvm"),
    };
    let samples = load_samples(&data)?;
    let edges = canonical_edges(&fusion_edges(&samples, threshold)?);
    match &args.out {
        Some(path) => {
            write_edge_list(&edges, path)?;
            eprintln!("{} edges over {} features -> {}", edges.len(), samples.dim(), path.display());
        }
        None => {
            for (i, j) in &edges {
                println!("{i} {j}");
            }
        }
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4e}"))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => a.config(true).and_then(|c| solve(&c)).map(|_| true),
        Command::Bench(a) => a.config(false).and_then(|c| bench(&c)).map(|_| true),
        Command::Check(a) => a.config(true).and_then(|c| check(&c)),
        Command::Graph(a) => graph(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
