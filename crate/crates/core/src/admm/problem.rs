use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, invalid, Error, Result};
use crate::linalg::{axpy, spectral_extremes, LinearOperator};
use crate::losses::SmoothLoss;
use crate::regularizers::Regularizer;

/// Tolerance handed to the dense eigensolver when spectra are not supplied.
pub const SPECTRAL_TOL: f64 = 1e-12;

/// One constrained block `(B_j, g_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub op: LinearOperator,
    pub reg: Regularizer,
}

impl Block {
    pub fn new(op: LinearOperator, reg: Regularizer) -> Self {
        Block { op, reg }
    }
}

/// `min f(x) + Σ_j g_j(y_j)  s.t.  A x + Σ_j B_j y_j = c`
#[derive(Debug, Clone)]
pub struct CompositeProblem<L> {
    loss: L,
    a: LinearOperator,
    blocks: Vec<Block>,
    c: Vec<f64>,
    a_spectrum: Option<(f64, f64)>,
    block_spectra: Vec<Option<(f64, f64)>>,
}

impl<L: SmoothLoss> CompositeProblem<L> {
    pub fn new(loss: L, a: LinearOperator, blocks: Vec<Block>, c: Vec<f64>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(invalid("at least one (B_j, g_j) block is required"));
        }
        check_dim(loss.dim(), a.cols())?;
        let rows = a.rows();
        check_dim(rows, c.len())?;
        for (j, blk) in blocks.iter().enumerate() {
            if blk.op.rows() != rows {
                return Err(invalid(format!(
                    "block {j} has {} rows, the constraint has {rows}",
                    blk.op.rows()
                )));
            }
            if blk.op.is_zero() {
                return Err(invalid(format!("block {j}: B_j must be nonzero")));
            }
            if let Regularizer::Nuclear { rows: r, cols: k, .. } = blk.reg {
                check_dim(blk.op.cols(), r * k)?;
            }
        }
        let m = blocks.len();
        Ok(CompositeProblem {
            loss,
            a,
            blocks,
            c,
            a_spectrum: None,
            block_spectra: vec![None; m],
        })
    }

    /// Supplies `(σ_min, σ_max)` of `AᵀA` instead of computing it.
    pub fn with_a_spectrum(mut self, lo: f64, hi: f64) -> Result<Self> {
        check_spectrum(lo, hi)?;
        self.a_spectrum = Some((lo, hi));
        Ok(self)
    }

    /// Supplies `(σ_min, σ_max)` of `B_jᵀB_j`.
    pub fn with_block_spectrum(mut self, j: usize, lo: f64, hi: f64) -> Result<Self> {
        check_spectrum(lo, hi)?;
        let slot = self
            .block_spectra
            .get_mut(j)
            .ok_or_else(|| invalid(format!("no block {j}")))?;
        *slot = Some((lo, hi));
        Ok(self)
    }

    pub fn loss(&self) -> &L {
        &self.loss
    }

    pub fn a(&self) -> &LinearOperator {
        &self.a
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn dim(&self) -> usize {
        self.a.cols()
    }

    pub fn constraint_rows(&self) -> usize {
        self.a.rows()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.op.cols()).collect()
    }

    /// `(σ_min, σ_max)` of `AᵀA`.
    pub fn a_spectrum(&self) -> Result<(f64, f64)> {
        match self.a_spectrum {
            Some(s) => Ok(s),
            None => spectral_extremes(&self.a, SPECTRAL_TOL),
        }
    }

    /// `(σ_min, σ_max)` of `B_jᵀB_j`.
    pub fn block_spectrum(&self, j: usize) -> Result<(f64, f64)> {
        match self.block_spectra.get(j) {
            Some(Some(s)) => Ok(*s),
            Some(None) => spectral_extremes(&self.blocks[j].op, SPECTRAL_TOL),
            None => Err(invalid(format!("no block {j}"))),
        }
    }

    pub fn check_point(&self, x: &[f64], y: &[Vec<f64>]) -> Result<()> {
        check_dim(self.dim(), x.len())?;
        check_dim(self.blocks.len(), y.len())?;
        for (blk, yj) in self.blocks.iter().zip(y) {
            check_dim(blk.op.cols(), yj.len())?;
        }
        Ok(())
    }

    /// `A x + Σ_j B_j y_j − c`
    pub fn residual(&self, x: &[f64], y: &[Vec<f64>]) -> Vec<f64> {
        let mut res = vec![0.0; self.a.rows()];
        self.a.apply_into(x, &mut res);
        let mut tmp = vec![0.0; res.len()];
        for (blk, yj) in self.blocks.iter().zip(y) {
            blk.op.apply_into(yj, &mut tmp);
            axpy(1.0, &tmp, &mut res);
        }
        axpy(-1.0, &self.c, &mut res);
        res
    }

    /// `f(x) + Σ_j g_j(y_j)`
    pub fn objective(&self, x: &[f64], y: &[Vec<f64>]) -> Result<f64> {
        let mut v = self.loss.full_value(x);
        for (blk, yj) in self.blocks.iter().zip(y) {
            v += blk.reg.value(yj)?;
        }
        Ok(v)
    }
}

fn check_spectrum(lo: f64, hi: f64) -> Result<()> {
    if lo >= 0.0 && hi >= lo && hi.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("invalid spectrum ({lo}, {hi})")))
    }
}
