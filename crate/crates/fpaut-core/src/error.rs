use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("factor index {0} out of range")]
    FactorIndex(usize),
    #[error("element {elem} is not in factor {factor}")]
    Element { factor: usize, elem: i64 },
    #[error("move is based at a different domain")]
    BaseMismatch,
    #[error("tuple does not describe a domain: {0}")]
    NotADomain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
