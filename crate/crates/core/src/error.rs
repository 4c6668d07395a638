use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Parameters that cannot be realised on any grid we are willing to allocate.
    #[error("setup error: {0}")]
    Setup(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("blow-up at t = {t}: {what}")]
    BlowUp { t: f64, what: String },

    #[error("time step {dt} exceeds the stability limit {limit} at t = {t}")]
    StepSize { t: f64, dt: f64, limit: f64 },

    #[error("flow map lost monotonicity at t = {t} near node {node}")]
    Diffeomorphism { t: f64, node: usize },

    #[error("diagnostic unavailable: {0}")]
    Unavailable(String),

    #[error("malformed field dump {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn setup(msg: impl Into<String>) -> Self {
        Error::Setup(msg.into())
    }

    /// True for errors caused by the caller's configuration rather than by a run.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::InvalidGrid(_) | Error::InvalidArgument(_) | Error::Setup(_)
        )
    }
}
