use crate::specfun::SpecFunError;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error("extension angle gamma = {gamma} is not admissible for mode k = 0 (need sin(gamma)cos(gamma) = 0)")]
    Inadmissible { gamma: f64 },
    #[error("angular resolution M = {m} is too small for K_max = {k_max} (need M >= {needed})")]
    Resolution { m: usize, k_max: usize, needed: usize },
    #[error("input has zero norm")]
    ZeroNorm,
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("empty grid: {0}")]
    EmptyGrid(&'static str),
    #[error("insufficient time span: {0}")]
    InsufficientSpan(String),
    #[error("outside the supported regime: {0}")]
    Regime(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { field, reason: reason.into() }
}
