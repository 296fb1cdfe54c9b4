use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// A scenario or operation parameter is outside its valid range.
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    /// A matrix argument does not have the required structure.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A channel realization produced a zero normalization.
    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    #[error("fixed point did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    /// A deterministic-equivalent denominator left its valid region.
    #[error("unstable deterministic equivalent: {0}")]
    Instability(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config_err(msg: impl Into<String>) -> Error {
    Error::InvalidConfiguration(msg.into())
}
