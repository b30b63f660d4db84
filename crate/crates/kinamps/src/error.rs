use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero polynomial")]
    DivisionByZero,

    #[error("substitution makes a denominator identically zero")]
    ZeroDenominatorAfterSubstitution,

    #[error("denominator vanishes at the evaluation point")]
    PoleAtPoint,

    #[error("variable {0} is not covered by the evaluation point")]
    UncoveredVariable(String),

    #[error("unknown variable id {0}")]
    UnknownVariable(u32),

    #[error("invalid leg set: {0}")]
    InvalidLegSet(String),

    #[error("invalid split: {0}")]
    BadSplit(String),

    #[error("unsupported tier: n = {0}")]
    UnsupportedTier(usize),

    #[error("pole of order {0} (expected at most 1)")]
    PoleOrderTooHigh(u32),

    #[error("same-leg polarization contraction for leg {0} (tree-level invariant violated)")]
    PolPolContraction(String),

    #[error("reference expression is zero")]
    ZeroReference,

    #[error("not proportional: {0}")]
    NotProportional(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("cache entry is stale or corrupt: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;
