use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("green function evaluated on the diagonal")]
    Singularity,
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("basis error: {0}")]
    Basis(String),
    #[error("zero extraction failed: {0}")]
    Extraction(String),
    #[error("certificate failure: {0}")]
    Certificate(String),
    #[error("inconsistency: {0}")]
    Inconsistent(String),
    #[error("config error at '{path}': {message}")]
    Config { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
