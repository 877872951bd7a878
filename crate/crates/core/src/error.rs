use alloc::string::String;

/// Errors produced by the solver core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The operation is not supported at this size or for this input kind.
    #[error("capability limit: {0}")]
    Capability(String),

    #[error("hyperparameter derivation failed: {0}")]
    HyperParam(String),

    #[error("non-finite value at iteration {iteration} (rho = {rho}, eta = {eta})")]
    Divergence { iteration: usize, rho: f64, eta: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
