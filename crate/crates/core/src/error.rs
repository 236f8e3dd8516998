use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum IsacError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no mode has a positive gain, nothing to allocate power to")]
    NoFeasibleGain,

    #[error("infeasible shape: {0}")]
    InfeasibleShape(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("oracle refused: {0}")]
    OracleTooLarge(String),

    #[error("trial {trial} at sweep point {point} failed: {source}")]
    Trial {
        point: usize,
        trial: usize,
        #[source]
        source: Box<IsacError>,
    },

    #[error("sweep point {point}: {failed} of {total} trials failed (first: {first})")]
    SweepFailed {
        point: usize,
        failed: usize,
        total: usize,
        first: String,
    },

    #[error("config parse error at line {line}, column {column}: {message}")]
    ConfigParse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid config field `{field}`: {reason}")]
    ConfigValidation { field: String, reason: String },

    #[error("unknown figure `{name}`; valid names: {valid}")]
    UnknownFigure { name: String, valid: String },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl IsacError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        IsacError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn input(reason: impl Into<String>) -> Self {
        IsacError::InvalidInput(reason.into())
    }
}

pub type Result<T> = std::result::Result<T, IsacError>;
