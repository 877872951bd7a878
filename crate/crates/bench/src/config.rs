//! JSON experiment configuration.

use std::path::{Path, PathBuf};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use vradmm_core::admm::{HyperParams, SolverKind};

use crate::error::{io_err, BenchError, Result};
use crate::synth::{BinarySpec, MulticlassSpec};

/// Default graph-guided weight `λ`.
pub const DEFAULT_LAMBDA: f64 = 1e-5;
pub const DEFAULT_LAMBDA1: f64 = 1e-5;
pub const DEFAULT_LAMBDA2: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub problem: ProblemSpec,
    pub solvers: Vec<SolverSpec>,
    /// Settings shared by every solver; per-solver fields take precedence.
    #[serde(default)]
    pub defaults: HyperConfig,
    pub seeds: Vec<u64>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub target: TargetSpec,
    /// Record the exact stationarity measure every iteration.
    #[serde(default)]
    pub stationarity: bool,
    /// Record the Lyapunov function every iteration.
    #[serde(default)]
    pub lyapunov: bool,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("runs")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Libsvm(PathBuf),
    SyntheticBinary(BinarySpec),
    SyntheticMulticlass(MulticlassSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    Graph(GraphSpec),
    Multitask(MultitaskSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_mu")]
    pub mu: f64,
    /// Correlation threshold for the fusion graph.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Edge-list file used instead of the correlation graph.
    #[serde(default)]
    pub edges: Option<PathBuf>,
}

fn default_lambda() -> f64 {
    DEFAULT_LAMBDA
}
fn default_mu() -> f64 {
    1.0
}
fn default_threshold() -> f64 {
    crate::graph::DEFAULT_THRESHOLD
}

impl Default for GraphSpec {
    fn default() -> Self {
        GraphSpec {
            lambda: DEFAULT_LAMBDA,
            mu: 1.0,
            threshold: default_threshold(),
            edges: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultitaskSpec {
    #[serde(default = "default_lambda1")]
    pub lambda1: f64,
    #[serde(default = "default_lambda2")]
    pub lambda2: f64,
    #[serde(default = "one")]
    pub alpha_ls: f64,
    #[serde(default = "one")]
    pub beta_ls: f64,
}

fn default_lambda1() -> f64 {
    DEFAULT_LAMBDA1
}
fn default_lambda2() -> f64 {
    DEFAULT_LAMBDA2
}
fn one() -> f64 {
    1.0
}

impl Default for MultitaskSpec {
    fn default() -> Self {
        MultitaskSpec {
            lambda1: DEFAULT_LAMBDA1,
            lambda2: DEFAULT_LAMBDA2,
            alpha_ls: 1.0,
            beta_ls: 1.0,
        }
    }
}

/// How IFO-to-target is measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    /// Slack added to the reference objective.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Fixed reference objective. Without it the deterministic solver's
    /// final objective for the same seed is used, when that solver is listed.
    #[serde(default)]
    pub objective: Option<f64>,
    /// Stop non-reference runs once they reach the target.
    #[serde(default)]
    pub stop_at_target: bool,
}

fn default_tolerance() -> f64 {
    1e-3
}

impl Default for TargetSpec {
    fn default() -> Self {
        TargetSpec {
            tolerance: default_tolerance(),
            objective: None,
            stop_at_target: false,
        }
    }
}

/// Optional hyperparameter overrides; `None` keeps the default prescription.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epoch_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub online_batch: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theory_rho: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_output: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub early_stop_theta: Option<f64>,
}

impl HyperConfig {
    /// Fields set in `self` win over those in `base`.
    pub fn over(&self, base: &HyperConfig) -> HyperConfig {
        HyperConfig {
            alpha: self.alpha.or(base.alpha),
            iterations: self.iterations.or(base.iterations),
            epochs: self.epochs.or(base.epochs),
            batch: self.batch.or(base.batch),
            period: self.period.or(base.period),
            epoch_len: self.epoch_len.or(base.epoch_len),
            online_batch: self.online_batch.or(base.online_batch),
            rho: self.rho.or(base.rho),
            eta: self.eta.or(base.eta),
            lipschitz: self.lipschitz.or(base.lipschitz),
            theory_rho: self.theory_rho.or(base.theory_rho),
            random_output: self.random_output.or(base.random_output),
            early_stop_theta: self.early_stop_theta.or(base.early_stop_theta),
        }
    }

    pub fn to_hyperparams(&self, seed: u64) -> HyperParams {
        let d = HyperParams::default();
        HyperParams {
            alpha: self.alpha.unwrap_or(d.alpha),
            iterations: self.iterations.unwrap_or(d.iterations),
            epochs: self.epochs,
            batch: self.batch,
            period: self.period,
            epoch_len: self.epoch_len,
            online_batch: self.online_batch,
            rho: self.rho,
            eta: self.eta,
            lipschitz: self.lipschitz,
            theory_rho: self.theory_rho.unwrap_or(false),
            seed,
            random_output: self.random_output.unwrap_or(false),
            early_stop_theta: self.early_stop_theta,
            ..d
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSpec {
    pub solver: SolverName,
    #[serde(flatten)]
    pub hyper: HyperConfig,
}

impl SolverSpec {
    pub fn new(kind: SolverKind) -> Self {
        SolverSpec {
            solver: SolverName(kind),
            hyper: HyperConfig::default(),
        }
    }
}

/// Solver kind serialized by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverName(pub SolverKind);

impl Serialize for SolverName {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.0.name())
    }
}

impl<'de> Deserialize<'de> for SolverName {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map(SolverName).map_err(D::Error::custom)
    }
}

impl ExperimentConfig {
    /// Reads a JSON config; relative data, edge and output paths are
    /// resolved against the config file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let DataSource::Libsvm(p) = &mut cfg.data {
            *p = resolve(base, p);
        }
        if let ProblemSpec::Graph(GraphSpec { edges: Some(p), .. }) = &mut cfg.problem {
            *p = resolve(base, p);
        }
        cfg.out_dir = resolve(base, &cfg.out_dir);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(BenchError::Config(m));
        if self.solvers.is_empty() {
            return bad("at least one solver is required".into());
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        for (i, s) in self.solvers.iter().enumerate() {
            if self.solvers[..i].iter().any(|t| t.solver == s.solver) {
                return bad(format!("solver {} listed twice", s.solver.0));
            }
        }
        match &self.problem {
            ProblemSpec::Graph(g) => {
                if !(g.lambda >= 0.0) || !(g.mu >= 0.0) {
                    return bad("lambda and mu must be >= 0".into());
                }
                if matches!(self.data, DataSource::SyntheticMulticlass(_)) {
                    return bad("the graph problem needs binary data".into());
                }
            }
            ProblemSpec::Multitask(m) => {
                if !(m.lambda1 >= 0.0) || !(m.lambda2 >= 0.0) || !(m.alpha_ls > 0.0) || !(m.beta_ls > 0.0) {
                    return bad("need lambda1, lambda2 >= 0 and alpha_ls, beta_ls > 0".into());
                }
                if matches!(self.data, DataSource::SyntheticBinary(_)) {
                    return bad("the multi-task problem needs multi-class data".into());
                }
            }
        }
        if !(self.target.tolerance >= 0.0) {
            return bad("target tolerance must be >= 0".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, ignoring the output directory.
    pub fn hash(&self) -> String {
        let mut canon = self.clone();
        canon.out_dir = PathBuf::new();
        let bytes = serde_json::to_vec(&canon).expect("config serializes");
        format!("{:x}", Sha256::digest(&bytes))
    }

    /// Merged settings for one solver.
    pub fn solver_hyper(&self, spec: &SolverSpec) -> HyperConfig {
        spec.hyper.over(&self.defaults)
    }

    /// Small graph-guided sweep over synthetic data.
    pub fn example_graph(n: usize, d: usize) -> Self {
        ExperimentConfig {
            data: DataSource::SyntheticBinary(BinarySpec::new(n, d, 0)),
            problem: ProblemSpec::Graph(GraphSpec::default()),
            solvers: vec![SolverSpec::new(SolverKind::Deterministic), SolverSpec::new(SolverKind::Spider)],
            defaults: HyperConfig::default(),
            seeds: vec![1],
            out_dir: default_out_dir(),
            target: TargetSpec::default(),
            stationarity: false,
            lyapunov: false,
        }
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "data": {"synthetic_binary": {"n": 100, "d": 5}},
        "problem": {"graph": {"lambda": 1e-5}},
        "solvers": [{"solver": "spider", "iterations": 50}, {"solver": "svrg-admm"}],
        "defaults": {"iterations": 20, "alpha": 0.5},
        "seeds": [1, 2, 3]
    }"#;

    #[test]
    fn parse_and_merge() {
        let cfg: ExperimentConfig = serde_json::from_str(SAMPLE).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.solvers[1].solver.0, SolverKind::Svrg);
        let hp = cfg.solver_hyper(&cfg.solvers[0]).to_hyperparams(7);
        assert_eq!((hp.iterations, hp.alpha, hp.seed), (50, 0.5, 7));
        let hp = cfg.solver_hyper(&cfg.solvers[1]).to_hyperparams(7);
        assert_eq!(hp.iterations, 20);
        match &cfg.problem {
            ProblemSpec::Graph(g) => assert_eq!((g.mu, g.threshold), (1.0, 0.5)),
            _ => unreachable!(),
        }
    }

    #[test]
    fn hash_ignores_output_dir_and_formatting() {
        let a: ExperimentConfig = serde_json::from_str(SAMPLE).unwrap();
        let mut b: ExperimentConfig = serde_json::from_str(&SAMPLE.replace("\n", " ")).unwrap();
        b.out_dir = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), b.hash());
        b.seeds.push(4);
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn invalid_configs() {
        assert!(serde_json::from_str::<ExperimentConfig>(&SAMPLE.replace("spider", "nope")).is_err());
        let mut cfg: ExperimentConfig = serde_json::from_str(SAMPLE).unwrap();
        cfg.seeds.clear();
        assert!(cfg.validate().is_err());
        let mut cfg: ExperimentConfig = serde_json::from_str(SAMPLE).unwrap();
        cfg.solvers.push(SolverSpec::new(SolverKind::Spider));
        assert!(cfg.validate().is_err());
        let mut cfg: ExperimentConfig = serde_json::from_str(SAMPLE).unwrap();
        cfg.problem = ProblemSpec::Graph(GraphSpec {
            lambda: -1.0,
            ..GraphSpec::default()
        });
        assert!(cfg.validate().is_err());
    }
}
