use std::path::PathBuf;

/// Errors raised by the linear-algebra kernels, loaders, sketches and solvers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotSpd { min_eigenvalue: f64 },
    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e} below -tol*lambda_max)")]
    NotPsd { eigenvalue: f64 },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("malformed file (line {line}): {reason}")]
    MalformedFile { line: usize, reason: String },
    #[error("parse error (line {line}): cannot parse {token:?}")]
    Parse { line: usize, token: String },
    #[error("empty matrix")]
    EmptyMatrix,
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
