use thiserror::Error;

/// Errors raised by model construction, loading and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MdpError {
    #[error("discount must lie strictly inside (0, 1), got {0}")]
    InvalidGamma(f64),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("transition row (s={state}, a={action}) is invalid: {reason}")]
    BadRow {
        state: usize,
        action: usize,
        reason: String,
    },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("linear solve failed to reach tolerance (residual {residual:.3e}, tolerance {tolerance:.3e})")]
    SolveFailed { residual: f64, tolerance: f64 },

    #[error("inner solver did not converge after {sweeps} sweeps (last residual {residual:.3e})")]
    NonConvergence { sweeps: usize, residual: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for MdpError {
    fn from(e: std::io::Error) -> Self {
        MdpError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, MdpError>;
