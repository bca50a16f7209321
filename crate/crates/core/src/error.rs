//! Error type shared by every module of the crate.

use std::path::PathBuf;

use thiserror::Error;

/// Failures reported by kinklab operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("well not found: {0}")]
    WellNotFound(String),

    #[error("not a well at {phi}: {reason}")]
    NotAWell { phi: f64, reason: String },

    #[error("degenerate well at {phi}: W''(phi) = {second_derivative}")]
    DegenerateWell { phi: f64, second_derivative: f64 },

    #[error("wells {left} and {right} are not adjacent")]
    NotAdjacentWells { left: f64, right: f64 },

    #[error("derivative of order {order} unavailable (maximum order {max})")]
    DerivativeUnavailable { order: usize, max: usize },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("domain too small: {0}")]
    DomainTooSmall(String),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("kink inversion failed at x = {x}: {reason}")]
    InversionFailure { x: f64, reason: String },

    #[error("invalid bracket: {0}")]
    BracketInvalid(String),

    #[error("eigen solve failed: {0}")]
    EigenFailure(String),

    #[error("time step violates the CFL bound: dt = {dt}, dx = {dx}")]
    CflViolation { dt: f64, dx: f64 },

    #[error("solution blew up at t = {t}")]
    BlowUp { t: f64 },

    #[error("modulation failed: {0}")]
    ModulationFailure(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameters(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }
}
