use std::path::PathBuf;

use thiserror::Error;

/// Geodesic mode: pressure (longitudinal) or shear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    P,
    S,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::P => write!(f, "p"),
            Mode::S => write!(f, "s"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("non-positive {parameter} at grid index {index:?} (value {value})")]
    NonPositiveParameter {
        parameter: &'static str,
        index: Vec<usize>,
        value: f64,
    },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("support violation: {0}")]
    SupportViolation(String),

    #[error("unstable time step at step {step} (|u| = {magnitude:e})")]
    UnstableStep { step: usize, magnitude: f64 },

    #[error("inconsistent data: final state differs from the trace at T by {deviation:e}")]
    InconsistentData { deviation: f64 },

    #[error("conjugate gradient did not reach rtol {rtol:e} in {iterations} iterations (relative residual {residual:e})")]
    SolverDivergence {
        iterations: usize,
        residual: f64,
        rtol: f64,
    },

    #[error("no progress: increment ratio {ratio:.6} above 0.999 for 5 iterations (iteration {iteration})")]
    NoProgress { iteration: usize, ratio: f64 },

    #[error("ray from {origin:?} along {direction:?} ({mode}) did not exit within the time budget")]
    TrappedRay {
        origin: Vec<f64>,
        direction: Vec<f64>,
        mode: Mode,
    },

    #[error("oracle too large: {unknowns} unknowns exceeds the cap {cap}")]
    TooLarge { unknowns: usize, cap: usize },

    #[error("reference field has zero norm")]
    ZeroTruth,

    #[error("invalid configuration key `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },

    #[error("malformed {format} data: {reason}")]
    Format { format: &'static str, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn format(format: &'static str, reason: impl Into<String>) -> Self {
        Error::Format {
            format,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
