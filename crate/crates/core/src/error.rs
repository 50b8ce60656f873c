use thiserror::Error;

/// Errors produced by the library.
///
/// The variants are grouped so that callers (the CLI in particular) can map
/// them onto configuration, numerical and data failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value in feature `{feature}` at node {index}")]
    NonFiniteFeature { feature: String, index: usize },

    #[error(
        "solver did not converge in {iterations} iterations (last residual {last_residual:e})"
    )]
    NonConvergence {
        iterations: usize,
        last_residual: f64,
        residual_history: Vec<f64>,
    },

    #[error("NaN detected in {field} at iteration {iteration}")]
    NotANumber {
        field: &'static str,
        iteration: usize,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("malformed `{field}`: {message}")]
    Format { field: String, message: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("envelope member {corner} failed: {source}")]
    Member {
        corner: String,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Configuration,
    Numerical,
    Data,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Member { source, .. } => source.kind(),
            Error::InvalidArgument(_) | Error::Config(_) | Error::Dimension { .. } => {
                ErrorKind::Configuration
            }
            Error::NonConvergence { .. } | Error::NotANumber { .. } => ErrorKind::Numerical,
            Error::NonFiniteFeature { .. }
            | Error::Parse { .. }
            | Error::Format { .. }
            | Error::Data(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_) => ErrorKind::Data,
        }
    }
}
