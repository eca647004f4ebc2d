//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by solvers, estimators and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numerically rank-deficient: {0}")]
    RankDeficient(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("nullspace property does not hold: {0}")]
    NoNsp(String),
    #[error("no convergence guarantee: {0}")]
    NoGuarantee(String),
    #[error("not certifiable: {0}")]
    NotCertifiable(String),
    #[error("did not converge: {0}")]
    Convergence(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
