//! Stochastic gradient estimators (SPIDER, online SPIDER, SVRG, SAGA) with
//! exact incremental first-order oracle (IFO) accounting.
//!
//! One IFO is one evaluation of a single-sample gradient `∇f_i`. A full
//! gradient costs `n`; a minibatch of size `b` costs `b` per point it is
//! evaluated at. Stored SAGA table entries are lookups and cost nothing.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::linalg::{axpy, dist_sq, SeededRng};
use crate::losses::{SampleStream, SmoothLoss};

/// Running count of single-sample gradient evaluations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct IfoCounter(u64);

impl IfoCounter {
    pub fn new() -> Self {
        IfoCounter(0)
    }

    pub fn count(&self) -> u64 {
        self.0
    }

    pub fn charge(&mut self, evaluations: usize) {
        self.0 += evaluations as u64;
    }
}

fn draw(rng: &mut SeededRng, n: usize, b: usize) -> Vec<usize> {
    (0..b).map(|_| rng.index(n)).collect()
}

// out = ∇f_I(x) − ∇f_I(x_ref) + base
fn difference_estimate<L: SmoothLoss>(
    loss: &L,
    idx: &[usize],
    x: &[f64],
    x_ref: &[f64],
    base: &[f64],
    out: &mut [f64],
) {
    let d = x.len();
    let mut g_ref = vec![0.0; d];
    loss.minibatch_grad_into(x, idx, out);
    loss.minibatch_grad_into(x_ref, idx, &mut g_ref);
    for ((o, r), b) in out.iter_mut().zip(&g_ref).zip(base) {
        *o = (*o - r) + b;
    }
}

/// SPIDER estimator for finite sums.
///
/// Every `q` iterations `v_k = ∇f(x_k)`; otherwise
/// `v_k = ∇f_I(x_k) − ∇f_I(x_{k−1}) + v_{k−1}` with `|I| = b`.
#[derive(Debug, Clone)]
pub struct SpiderState {
    v_prev: Vec<f64>,
    x_prev: Vec<f64>,
    k: usize,
    q: usize,
    b: usize,
}

impl SpiderState {
    pub fn new(dim: usize, q: usize, b: usize) -> Result<Self> {
        if q == 0 || b == 0 {
            return Err(invalid("SPIDER needs q >= 1 and b >= 1"));
        }
        Ok(SpiderState {
            v_prev: vec![0.0; dim],
            x_prev: vec![0.0; dim],
            k: 0,
            q,
            b,
        })
    }

    /// Index of the next step.
    pub fn iteration(&self) -> usize {
        self.k
    }

    pub fn period(&self) -> usize {
        self.q
    }

    /// Whether the next step recomputes the exact gradient.
    pub fn refreshes_next(&self) -> bool {
        self.k % self.q == 0
    }

    pub fn step<L: SmoothLoss>(&mut self, loss: &L, x: &[f64], rng: &mut SeededRng, ifo: &mut IfoCounter) -> &[f64] {
        let mut v = vec![0.0; x.len()];
        if self.refreshes_next() {
            loss.full_grad_into(x, &mut v);
            ifo.charge(loss.num_samples());
        } else {
            let idx = draw(rng, loss.num_samples(), self.b);
            difference_estimate(loss, &idx, x, &self.x_prev, &self.v_prev, &mut v);
            ifo.charge(2 * self.b);
        }
        self.x_prev.copy_from_slice(x);
        self.v_prev = v;
        self.k += 1;
        &self.v_prev
    }
}

/// `b₂ = round(√b₁)`; warns when `b₁` is not a perfect square.
pub fn online_inner_batch(b1: usize) -> usize {
    let b2 = libm::round(libm::sqrt(b1 as f64)) as usize;
    if b2 * b2 != b1 {
        log::warn!("b1 = {b1} is not a perfect square; using b2 = round(sqrt(b1)) = {b2}");
    }
    b2.max(1)
}

/// Online SPIDER estimator: refresh with `b₁` fresh samples, recursion with `b₂ = √b₁`.
#[derive(Debug, Clone)]
pub struct SpiderOnlineState {
    v_prev: Vec<f64>,
    x_prev: Vec<f64>,
    k: usize,
    q: usize,
    b1: usize,
    b2: usize,
}

impl SpiderOnlineState {
    pub fn new(dim: usize, b1: usize, b2: usize, q: usize) -> Result<Self> {
        if b1 < 1 {
            return Err(invalid("online SPIDER needs b1 >= 1"));
        }
        if q == 0 {
            return Err(invalid("online SPIDER needs q >= 1"));
        }
        let expect = libm::round(libm::sqrt(b1 as f64)) as usize;
        if b2 != expect {
            return Err(invalid(alloc::format!("b2 must equal round(sqrt(b1)) = {expect}, got {b2}")));
        }
        Ok(SpiderOnlineState {
            v_prev: vec![0.0; dim],
            x_prev: vec![0.0; dim],
            k: 0,
            q,
            b1,
            b2,
        })
    }

    pub fn iteration(&self) -> usize {
        self.k
    }

    pub fn period(&self) -> usize {
        self.q
    }

    pub fn batches(&self) -> (usize, usize) {
        (self.b1, self.b2)
    }

    pub fn refreshes_next(&self) -> bool {
        self.k % self.q == 0
    }

    pub fn step<S: SampleStream>(
        &mut self,
        stream: &S,
        x: &[f64],
        rng: &mut SeededRng,
        ifo: &mut IfoCounter,
    ) -> &[f64] {
        let mut v = vec![0.0; x.len()];
        if self.refreshes_next() {
            let batch = stream.draw(rng, self.b1);
            stream.batch_grad_into(&batch, x, &mut v);
            ifo.charge(self.b1);
        } else {
            let batch = stream.draw(rng, self.b2);
            let mut g_prev = vec![0.0; x.len()];
            stream.batch_grad_into(&batch, x, &mut v);
            stream.batch_grad_into(&batch, &self.x_prev, &mut g_prev);
            for ((o, r), b) in v.iter_mut().zip(&g_prev).zip(&self.v_prev) {
                *o = (*o - r) + b;
            }
            ifo.charge(2 * self.b2);
        }
        self.x_prev.copy_from_slice(x);
        self.v_prev = v;
        self.k += 1;
        &self.v_prev
    }
}

/// SVRG estimator: `v = ∇f_I(x) − ∇f_I(x̃) + ∇f(x̃)` with the snapshot
/// `x̃` refreshed at the start of every epoch of `m` inner steps.
#[derive(Debug, Clone)]
pub struct SvrgState {
    snapshot: Vec<f64>,
    snapshot_grad: Vec<f64>,
    epoch_len: usize,
    b: usize,
    t: usize,
    epoch: usize,
}

impl SvrgState {
    pub fn new(dim: usize, epoch_len: usize, b: usize) -> Result<Self> {
        if epoch_len == 0 || b == 0 {
            return Err(invalid("SVRG needs M >= 1 and b >= 1"));
        }
        Ok(SvrgState {
            snapshot: vec![0.0; dim],
            snapshot_grad: vec![0.0; dim],
            epoch_len,
            b,
            t: 0,
            epoch: 0,
        })
    }

    pub fn snapshot(&self) -> &[f64] {
        &self.snapshot
    }

    pub fn snapshot_grad(&self) -> &[f64] {
        &self.snapshot_grad
    }

    /// Current epoch (1-based once the first step ran).
    pub fn epoch(&self) -> usize {
        self.epoch
    }

    /// Inner index of the next step within its epoch.
    pub fn inner_index(&self) -> usize {
        self.t % self.epoch_len
    }

    pub fn epoch_len(&self) -> usize {
        self.epoch_len
    }

    pub fn refreshes_next(&self) -> bool {
        self.t % self.epoch_len == 0
    }

    /// At an epoch boundary `x` becomes the new snapshot (`x̃^{s+1} = x_M^s`).
    pub fn step<L: SmoothLoss>(&mut self, loss: &L, x: &[f64], rng: &mut SeededRng, ifo: &mut IfoCounter) -> Vec<f64> {
        if self.refreshes_next() {
            self.snapshot.copy_from_slice(x);
            loss.full_grad_into(x, &mut self.snapshot_grad);
            ifo.charge(loss.num_samples());
            self.epoch += 1;
        }
        let idx = draw(rng, loss.num_samples(), self.b);
        let mut v = vec![0.0; x.len()];
        difference_estimate(loss, &idx, x, &self.snapshot, &self.snapshot_grad, &mut v);
        ifo.charge(2 * self.b);
        self.t += 1;
        v
    }
}

/// SAGA estimator with a table of per-sample gradients `g_i = ∇f_i(u_i)`.
///
/// The points `u_i` are kept too, for the table-distance diagnostics.
#[derive(Debug, Clone)]
pub struct SagaState {
    table: Vec<f64>,
    points: Vec<f64>,
    phi: Vec<f64>,
    n: usize,
    dim: usize,
    b: usize,
}

impl SagaState {
    /// Initializes every `u_i = x0` (costs `n` IFO).
    pub fn new<L: SmoothLoss>(loss: &L, x0: &[f64], b: usize, ifo: &mut IfoCounter) -> Result<Self> {
        if b == 0 {
            return Err(invalid("SAGA needs b >= 1"));
        }
        let (n, dim) = (loss.num_samples(), loss.dim());
        let mut table = vec![0.0; n * dim];
        for (i, row) in table.chunks_exact_mut(dim).enumerate() {
            loss.add_sample_grad(i, x0, 1.0, row);
        }
        ifo.charge(n);
        let mut state = SagaState {
            points: x0.repeat(n),
            phi: vec![0.0; dim],
            table,
            n,
            dim,
            b,
        };
        state.phi = state.table_mean();
        Ok(state)
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn stored_grad(&self, i: usize) -> &[f64] {
        &self.table[i * self.dim..(i + 1) * self.dim]
    }

    pub fn table_mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        let w = 1.0 / self.n as f64;
        for row in self.table.chunks_exact(self.dim) {
            axpy(w, row, &mut m);
        }
        m
    }

    /// `max_j |φ_j − mean(table)_j|`
    pub fn phi_drift(&self) -> f64 {
        let m = self.table_mean();
        crate::linalg::max_abs(&crate::linalg::sub(&self.phi, &m))
    }

    /// `(1/n) Σ_i ‖x − u_i‖²`
    pub fn mean_table_dist_sq(&self, x: &[f64]) -> f64 {
        self.points
            .chunks_exact(self.dim)
            .map(|u| dist_sq(x, u))
            .sum::<f64>()
            / self.n as f64
    }

    /// Probability that a given index lands in a with-replacement minibatch of size `b`.
    pub fn inclusion_probability(&self) -> f64 {
        saga_inclusion_probability(self.n, self.b)
    }

    pub fn step<L: SmoothLoss>(&mut self, loss: &L, x: &[f64], rng: &mut SeededRng, ifo: &mut IfoCounter) -> Vec<f64> {
        let d = self.dim;
        let idx = draw(rng, self.n, self.b);
        let mut fresh = vec![0.0; idx.len() * d];
        for (k, &i) in idx.iter().enumerate() {
            loss.add_sample_grad(i, x, 1.0, &mut fresh[k * d..(k + 1) * d]);
        }
        ifo.charge(idx.len());

        let mut v = vec![0.0; d];
        let w = 1.0 / idx.len() as f64;
        for (k, &i) in idx.iter().enumerate() {
            let g_new = &fresh[k * d..(k + 1) * d];
            let g_old = &self.table[i * d..(i + 1) * d];
            for ((vj, a), b) in v.iter_mut().zip(g_new).zip(g_old) {
                *vj += w * (a - b);
            }
        }
        for (vj, p) in v.iter_mut().zip(&self.phi) {
            *vj += p;
        }

        // Sequential table updates in draw order; a repeated index keeps the last write.
        let inv_n = 1.0 / self.n as f64;
        for (k, &i) in idx.iter().enumerate() {
            let g_new = &fresh[k * d..(k + 1) * d];
            let row = &mut self.table[i * d..(i + 1) * d];
            for ((p, a), b) in self.phi.iter_mut().zip(g_new).zip(row.iter()) {
                *p += inv_n * (a - b);
            }
            row.copy_from_slice(g_new);
            self.points[i * d..(i + 1) * d].copy_from_slice(x);
        }
        v
    }
}

/// `p = 1 − (1 − 1/n)^b`
pub fn saga_inclusion_probability(n: usize, b: usize) -> f64 {
    1.0 - libm::pow(1.0 - 1.0 / n as f64, b as f64)
}

fn refreshes(k: u64, period: u64) -> u64 {
    k.div_ceil(period)
}

/// `n⌈K/q⌉ + 2b(K − ⌈K/q⌉)`
pub fn ifo_total_spider(k: u64, n: u64, q: u64, b: u64) -> u64 {
    let r = refreshes(k, q);
    n * r + 2 * b * (k - r)
}

/// `b₁⌈K/q⌉ + 2b₂(K − ⌈K/q⌉)`
pub fn ifo_total_online(k: u64, b1: u64, q: u64, b2: u64) -> u64 {
    let r = refreshes(k, q);
    b1 * r + 2 * b2 * (k - r)
}

/// `n⌈K/M⌉ + 2bK`
pub fn ifo_total_svrg(k: u64, n: u64, m: u64, b: u64) -> u64 {
    n * refreshes(k, m) + 2 * b * k
}

/// `n + bK`
pub fn ifo_total_saga(k: u64, n: u64, b: u64) -> u64 {
    n + b * k
}

pub fn ifo_total_deterministic(k: u64, n: u64) -> u64 {
    n * k
}

pub fn ifo_total_sgd(k: u64, b: u64) -> u64 {
    b * k
}
