use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by dataset loading, resampling and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no usable labels after rare-label filtering")]
    NoUsableLabels,

    #[error("no eligible seed instances (all selection weights are zero)")]
    NoEligibleSeeds,
}

pub type Result<T> = std::result::Result<T, Error>;
