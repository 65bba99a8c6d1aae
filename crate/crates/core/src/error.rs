use thiserror::Error;

/// Errors surfaced by library operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid valuation: {0}")]
    InvalidValuation(String),
    #[error("invalid market: {0}")]
    InvalidMarket(String),
    #[error("invalid outcome: {0}")]
    InvalidOutcome(String),
    #[error("enumeration budget exceeded: {what} needs {needed} > {budget}")]
    Budget { what: &'static str, needed: u128, budget: u128 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("schema error at {path}: {msg}")]
    Schema { path: String, msg: String },
    #[error("search exhausted: {0}")]
    Exhausted(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
