use thiserror::Error;

/// Errors raised by the simulation and analysis layers.
#[derive(Debug, Error)]
pub enum PmeError {
    /// Invalid parameters supplied to a constructor or operation.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A trajectory left the admissible range (non-finite or `|u|_inf > 1e8`).
    #[error("numerical blow-up at step {step} (t = {time}): {reason}")]
    BlowUp { step: u64, time: f64, reason: String },

    #[error("ensemble rejected: {failed} of {total} members blew up")]
    EnsembleRejected { failed: usize, total: usize },

    #[error("no convergence after {iterations} iterations: {detail}")]
    NonConvergence { iterations: usize, detail: String },

    /// Input data does not satisfy an operation's preconditions.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, PmeError>;

pub(crate) fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(PmeError::Config(msg.into()))
}
