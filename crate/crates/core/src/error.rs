use thiserror::Error;

/// Errors raised by kernels, problems, oracles and the solver front end.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("point outside the interior of the kernel domain: {0}")]
    OutsideDomain(String),

    #[error("numerical failure: {what} (residual {residual:e})")]
    Numerical { what: String, residual: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("unknown {kind} '{name}'; valid names: {valid}")]
    Registry {
        kind: &'static str,
        name: String,
        valid: String,
    },

    #[error("range violation: forward-backward point left the kernel interior ({0})")]
    RangeViolation(String),

    #[error("grid objective is +inf at every node")]
    EmptyDomain,

    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}
