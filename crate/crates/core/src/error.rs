use thiserror::Error;

/// Errors raised by the lattice, semigroup, certification and solver layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("generator is not Metzler: entry ({row}, {col}) = {value}")]
    NotMetzler { row: usize, col: usize, value: f64 },

    #[error(
        "uncertifiable: component {component} is zero but f_i = {value} (no finite shift restores positivity)"
    )]
    Uncertifiable {
        component: usize,
        value: f64,
        state: Vec<f64>,
        time: f64,
    },

    #[error(
        "certification mismatch at t = {time}: f_i + lambda * y_i = {value} < 0 at component {component} (lambda = {lambda})"
    )]
    CertificationMismatch {
        time: f64,
        component: usize,
        value: f64,
        lambda: f64,
    },

    #[error("Picard iteration did not converge in {iterations} iterations (last residual {residual:e})")]
    IterationFailure { iterations: usize, residual: f64 },

    #[error("state left the nonnegative cone at t = {time}: component {component} = {value:e}")]
    PositivityFailure {
        time: f64,
        component: usize,
        value: f64,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("oracle diverged at t = {time}")]
    OracleDivergence { time: f64 },

    #[error("refused: {0}")]
    Refused(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short machine-readable tag, used in JSON error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NonFinite { .. } => "non_finite",
            Error::Domain(_) => "domain",
            Error::InvalidSpace(_) => "invalid_space",
            Error::InvalidMatrix(_) => "invalid_matrix",
            Error::NotMetzler { .. } => "not_metzler",
            Error::Uncertifiable { .. } => "uncertifiable",
            Error::CertificationMismatch { .. } => "certification_mismatch",
            Error::IterationFailure { .. } => "iteration_failure",
            Error::PositivityFailure { .. } => "positivity_failure",
            Error::Parameter(_) => "parameter",
            Error::OracleDivergence { .. } => "oracle_divergence",
            Error::Refused(_) => "refused",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}
