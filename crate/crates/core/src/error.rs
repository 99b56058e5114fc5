use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    /// Raised when supp(rho) is not contained in supp(sigma). Kept apart from
    /// numeric failures so callers can treat it as +inf.
    #[error("relative entropy is infinite (support condition violated)")]
    InfiniteRelativeEntropy,

    #[error("matrix function undefined on spectrum: {0}")]
    Singular(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("solver did not converge: {0}")]
    NoConvergence(String),

    #[error("refused: {0}")]
    Refused(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
