use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("points outside the construction domain (rows {rows:?})")]
    OutOfDomain { rows: Vec<usize> },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("column `{0}` not found")]
    MissingColumn(String),

    #[error("parse error at row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("target vector has zero norm; relative error is undefined")]
    ZeroTargetNorm,

    #[error(
        "Cholesky factorization failed after jitter {jitter:e} \
         (mean diagonal {mean_diagonal:e}, smallest diagonal {min_diagonal:e})"
    )]
    Cholesky {
        jitter: f64,
        mean_diagonal: f64,
        min_diagonal: f64,
    },

    #[error("SGD diverged at epoch {epoch}: objective rose for {streak} consecutive epochs (last {objective:e})")]
    Diverged {
        epoch: usize,
        streak: usize,
        objective: f64,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
