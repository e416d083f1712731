use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{x} is not invertible modulo {c}")]
    NotInvertible { x: i64, c: u64 },
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),
    #[error("ill-conditioned moment problem: {0}")]
    Conditioning(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
