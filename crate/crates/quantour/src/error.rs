//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: header row is missing required columns: {missing:?}")]
    HeaderMismatch { path: PathBuf, missing: Vec<String> },

    #[error("no input files found in {0}")]
    NoInputFiles(PathBuf),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("design matrix is rank deficient; dependent columns: {0:?}")]
    RankDeficient(Vec<String>),

    #[error("non-finite draw at iteration {iteration} in {block} update")]
    NonFiniteDraw { iteration: usize, block: &'static str },

    #[error("too few retained draws: {got} (need at least {need})")]
    TooFewDraws { got: usize, need: usize },

    #[error("optimizer failed to converge: {0}")]
    NoConvergence(String),

    #[error("direction {index}: {source}")]
    Direction {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code contract: 0 success, 1 runtime failure, 2 usage error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            _ => 1,
        }
    }
}
