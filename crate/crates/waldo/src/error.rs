//! Shared error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("valuation of 0 is undefined")]
    UndefinedValuation,
    #[error("system of congruences has no solution")]
    NoCrtSolution,
    #[error("failed to factor {0}")]
    FactorizationFailed(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("local data incomplete: {0}")]
    IncompleteData(String),
    #[error("U_p(e, phi) is only defined here for e = n~_p (got e = {got}, n~_p = {expected})")]
    UnsupportedLevel { got: u32, expected: u32 },
    #[error("value is not rational: {0}")]
    NotRational(String),
    #[error("radicand {0} does not embed into Q(sqrt2, sqrt3)")]
    UnsupportedRadicand(u64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
