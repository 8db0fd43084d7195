//! Crate-wide error type.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed table: {0}")]
    Table(String),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("empty input")]
    EmptyInput,
    #[error("undefined AUC: y_true contains a single class")]
    UndefinedAuc,
    #[error("sample id mismatch: {0}")]
    IdMismatch(String),
    #[error("sinkhorn did not converge within {iterations} iterations (marginal residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("empty overlap region at eta={eta}: propensity histogram (10 bins over [0,1]) {histogram:?}")]
    EmptyOverlap { eta: f64, histogram: Vec<usize> },
    #[error("training diverged: non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
