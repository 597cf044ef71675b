use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("sampling error at node {node} (x = {x}): {reason}")]
    Sampling { node: usize, x: f64, reason: String },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("numeric overflow: {0}")]
    Overflow(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("mollification sequence does not converge: {0}")]
    Convergence(String),
    #[error("atoms are not aligned to dyadic cells: {0}")]
    Alignment(String),
    #[error("stopping time is not adapted: {0}")]
    Adaptedness(String),
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn overflow<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Overflow(msg.into()))
}
