use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use super::CompositeProblem;
use crate::error::{invalid, Error, Result};
use crate::losses::SmoothLoss;

/// Which gradient estimator drives the x-update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverKind {
    Deterministic,
    Spider,
    SpiderOnline,
    Svrg,
    Saga,
    Sgd,
}

impl SolverKind {
    pub const ALL: [SolverKind; 6] = [
        SolverKind::Deterministic,
        SolverKind::Spider,
        SolverKind::SpiderOnline,
        SolverKind::Svrg,
        SolverKind::Saga,
        SolverKind::Sgd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Deterministic => "deterministic",
            SolverKind::Spider => "spider",
            SolverKind::SpiderOnline => "spider-online",
            SolverKind::Svrg => "svrg",
            SolverKind::Saga => "saga",
            SolverKind::Sgd => "sgd",
        }
    }

    /// Whether the step-size rules come with a convergence guarantee for this solver.
    pub fn is_faithful(self) -> bool {
        self != SolverKind::Sgd
    }

    // (ρ constant, η constant): ρ = c_ρ κ_G L / (σ^A_min α), η = c_η α σ_min(G) / L.
    fn constants(self) -> (f64, f64) {
        match self {
            SolverKind::Deterministic | SolverKind::Spider | SolverKind::SpiderOnline => {
                (libm::sqrt(170.0), 2.0 / 3.0)
            }
            SolverKind::Svrg => (2.0 * libm::sqrt(231.0), 1.0 / 5.0),
            SolverKind::Saga => (2.0 * libm::sqrt(2031.0), 1.0 / 17.0),
            SolverKind::Sgd => (libm::sqrt(170.0), 0.1 * 2.0 / 3.0),
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "deterministic" | "det" | "admm" => Ok(SolverKind::Deterministic),
            "spider" | "spider-admm" => Ok(SolverKind::Spider),
            "spider-online" | "online-spider" | "online" => Ok(SolverKind::SpiderOnline),
            "svrg" | "svrg-admm" => Ok(SolverKind::Svrg),
            "saga" | "saga-admm" => Ok(SolverKind::Saga),
            "sgd" | "sadmm" => Ok(SolverKind::Sgd),
            other => Err(invalid(format!("unknown solver '{other}'"))),
        }
    }
}

/// User-facing knobs. `None` fields fall back to the default prescriptions.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperParams {
    pub alpha: f64,
    /// Total iterations `K` (for SVRG: `S·M` inner steps).
    pub iterations: usize,
    /// SVRG outer epochs `S`; when set, overrides `iterations` with `S·M`.
    pub epochs: Option<usize>,
    /// Minibatch size `b` (SPIDER, SVRG, SAGA, SGD).
    pub batch: Option<usize>,
    /// SPIDER refresh period `q`.
    pub period: Option<usize>,
    /// SVRG epoch length `M`.
    pub epoch_len: Option<usize>,
    /// Online refresh batch `b₁`; `b₂ = round(√b₁)`.
    pub online_batch: Option<usize>,
    pub rho: Option<f64>,
    pub eta: Option<f64>,
    /// Overrides the loss-provided Lipschitz estimate.
    pub lipschitz: Option<f64>,
    /// Iterate `ρ ↦ formula(κ_G(ρ))` to a fixed point instead of using `κ_G = 1`.
    pub theory_rho: bool,
    pub seed: u64,
    /// Return a uniformly random iterate instead of the last one.
    pub random_output: bool,
    /// Stop once `θ_k` falls below this value.
    pub early_stop_theta: Option<f64>,
    pub lyapunov: bool,
    pub stationarity: bool,
    /// Use the `κ_A`-weighted Lyapunov coefficients.
    pub lyapunov_kappa_a: bool,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            alpha: 1.0,
            iterations: 1000,
            epochs: None,
            batch: None,
            period: None,
            epoch_len: None,
            online_batch: None,
            rho: None,
            eta: None,
            lipschitz: None,
            theory_rho: false,
            seed: 0,
            random_output: false,
            early_stop_theta: None,
            lyapunov: false,
            stationarity: false,
            lyapunov_kappa_a: false,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(invalid(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        for (name, v) in [("rho", self.rho), ("eta", self.eta), ("lipschitz", self.lipschitz)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(invalid(format!("{name} override must be positive, got {v}")));
                }
            }
        }
        for (name, v) in [
            ("batch", self.batch),
            ("period", self.period),
            ("epoch_len", self.epoch_len),
            ("online_batch", self.online_batch),
            ("epochs", self.epochs),
        ] {
            if v == Some(0) {
                return Err(invalid(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

/// Smallest `s` with `s² ≥ n`.
pub fn ceil_sqrt(n: usize) -> usize {
    ceil_root(n as u128, 2)
}

/// Smallest `s` with `s³ ≥ n`.
pub fn ceil_cbrt(n: usize) -> usize {
    ceil_root(n as u128, 3)
}

/// Smallest `s` with `s³ ≥ n²`, i.e. `⌈n^{2/3}⌉`.
pub fn ceil_two_thirds(n: usize) -> usize {
    ceil_root((n as u128) * (n as u128), 3)
}

fn ceil_root(n: u128, k: u32) -> usize {
    let mut s = libm::pow(n as f64, 1.0 / k as f64) as u128;
    while s > 0 && (s - 1).pow(k) >= n {
        s -= 1;
    }
    while s.pow(k) < n {
        s += 1;
    }
    s as usize
}

/// Concrete batch sizes and periods for one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schedule {
    pub iterations: usize,
    /// `b` (for the online variant: `b₂`).
    pub batch: usize,
    /// SPIDER refresh period `q` (1 for the deterministic solver).
    pub period: usize,
    /// SVRG epoch length `M`.
    pub epoch_len: usize,
    pub online_batch: usize,
}

/// Resolves minibatch sizes from overrides or the default prescriptions
/// (`b = q = ⌈√n⌉` for SPIDER, `b = ⌈n^{2/3}⌉`, `M = ⌈n^{1/3}⌉` for SVRG,
/// `b = ⌈n^{2/3}⌉` for SAGA, `b₁ = n`, `b₂ = q = round(√b₁)` online).
pub fn resolve_schedule(n: usize, hp: &HyperParams, kind: SolverKind) -> Result<Schedule> {
    hp.validate()?;
    if n == 0 {
        return Err(invalid("empty dataset"));
    }
    let b1 = hp.online_batch.unwrap_or(n);
    let (batch, period, epoch_len) = match kind {
        SolverKind::Deterministic => (n, 1, 1),
        SolverKind::Spider => {
            let b = hp.batch.unwrap_or_else(|| ceil_sqrt(n));
            (b, hp.period.unwrap_or(b), 1)
        }
        SolverKind::SpiderOnline => {
            let b2 = crate::estimators::online_inner_batch(b1);
            (b2, hp.period.unwrap_or(b2), 1)
        }
        SolverKind::Svrg => (
            hp.batch.unwrap_or_else(|| ceil_two_thirds(n)),
            1,
            hp.epoch_len.unwrap_or_else(|| ceil_cbrt(n)),
        ),
        SolverKind::Saga => (hp.batch.unwrap_or_else(|| ceil_two_thirds(n)), 1, 1),
        SolverKind::Sgd => (hp.batch.unwrap_or_else(|| ceil_sqrt(n)), 1, 1),
    };
    let iterations = match (kind, hp.epochs) {
        (SolverKind::Svrg, Some(s)) => s * epoch_len,
        _ => hp.iterations,
    };
    Ok(Schedule {
        iterations,
        batch,
        period,
        epoch_len,
        online_batch: b1,
    })
}

/// Spectral constants and the derived penalty/step parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedSpectra {
    pub lipschitz: f64,
    pub sigma_a_min: f64,
    pub sigma_a_max: f64,
    /// `max_j σ_max(B_jᵀB_j)`
    pub sigma_b_max: f64,
    /// `(σ_min, σ_max)` of each `B_jᵀB_j`.
    pub block_spectra: Vec<(f64, f64)>,
    pub r: f64,
    pub r_blocks: Vec<f64>,
    pub kappa_g: f64,
    pub kappa_a: f64,
    pub rho: f64,
    pub eta: f64,
    /// Largest observed `‖v_k‖`, filled in after a run.
    pub delta_estimate: Option<f64>,
}

impl DerivedSpectra {
    /// `σ_min(G) = r − ρη σ^A_max`
    pub fn sigma_g_min(&self) -> f64 {
        self.r - self.rho * self.eta * self.sigma_a_max
    }

    /// `σ_max(G) = r − ρη σ^A_min`
    pub fn sigma_g_max(&self) -> f64 {
        self.r - self.rho * self.eta * self.sigma_a_min
    }

    /// `min_j σ_min(H_j)` with `H_j = r_j I − ρ B_jᵀB_j`.
    pub fn sigma_h_min(&self) -> f64 {
        self.r_blocks
            .iter()
            .zip(&self.block_spectra)
            .map(|(r, (_, hi))| r - self.rho * hi)
            .fold(f64::INFINITY, f64::min)
    }

    /// `max_j σ_max(H_j)`
    pub fn sigma_h_max(&self) -> f64 {
        self.r_blocks
            .iter()
            .zip(&self.block_spectra)
            .map(|(r, (lo, _))| r - self.rho * lo)
            .fold(0.0, f64::max)
    }
}

/// Derives `ρ`, `η`, `r`, `r_j` and the reported `κ_G`, `κ_A`.
///
/// `ρ` is evaluated at `κ_G = 1`, `η` at `σ_min(G) = 1`, and `r`, `r_j` take
/// their minimal admissible values, which makes `σ_min(G) = σ_min(H_j) = 1`.
/// The realized `κ_G` is then reported.
pub fn derive_hyperparams<L: SmoothLoss>(
    problem: &CompositeProblem<L>,
    hp: &HyperParams,
    kind: SolverKind,
) -> Result<DerivedSpectra> {
    hp.validate()?;
    let lipschitz = hp.lipschitz.unwrap_or_else(|| problem.loss().lipschitz());
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(Error::HyperParam(format!("Lipschitz constant must be positive, got {lipschitz}")));
    }
    let (sa_min, sa_max) = problem.a_spectrum()?;
    let block_spectra = (0..problem.num_blocks())
        .map(|j| problem.block_spectrum(j))
        .collect::<Result<Vec<_>>>()?;
    let sigma_b_max = block_spectra.iter().map(|s| s.1).fold(0.0, f64::max);

    let (c_rho, c_eta) = kind.constants();
    let eta = hp.eta.unwrap_or(c_eta * hp.alpha / lipschitz);
    let rho = match hp.rho {
        Some(rho) => rho,
        None => {
            if !(sa_min > 0.0) {
                return Err(Error::HyperParam(
                    "σ_min(AᵀA) is zero: A must have full column rank (or pass an explicit rho)".into(),
                ));
            }
            let base = c_rho * lipschitz / (sa_min * hp.alpha);
            if hp.theory_rho {
                theory_rho(base, eta, sa_min, sa_max)?
            } else {
                base
            }
        }
    };
    let r = rho * eta * sa_max + 1.0;
    let r_blocks = block_spectra.iter().map(|(_, hi)| rho * hi + 1.0).collect();
    let kappa_g = (r - rho * eta * sa_min) / (r - rho * eta * sa_max);
    let kappa_a = if sa_min > 0.0 { sa_max / sa_min } else { f64::INFINITY };
    Ok(DerivedSpectra {
        lipschitz,
        sigma_a_min: sa_min,
        sigma_a_max: sa_max,
        sigma_b_max,
        block_spectra,
        r,
        r_blocks,
        kappa_g,
        kappa_a,
        rho,
        eta,
        delta_estimate: None,
    })
}

// ρ = base · κ_G(ρ) with κ_G(ρ) = 1 + ρη(σ_max − σ_min) at minimal r. The map
// is affine in ρ, so the fixed point is closed-form when its slope is below 1.
fn theory_rho(base: f64, eta: f64, sa_min: f64, sa_max: f64) -> Result<f64> {
    let slope = base * eta * (sa_max - sa_min);
    if slope < 1.0 {
        Ok(base / (1.0 - slope))
    } else {
        Err(Error::HyperParam(format!(
            "rho fixed-point equation has no positive solution (slope {slope:.3} must be below 1)"
        )))
    }
}
