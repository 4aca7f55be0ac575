use thiserror::Error;

use crate::market::Allocation;

/// Every failure the library reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid reference: {0}")]
    InvalidReference(String),
    #[error("invalid market: {0}")]
    InvalidMarket(String),
    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),
    #[error("standing assumption violated: {0}")]
    AssumptionViolation(String),
    #[error("degenerate market: {0}")]
    Degenerate(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
    #[error("size bound exceeded: {0}")]
    Size(String),
    #[error("value out of range: {0}")]
    Range(String),
    #[error("more than {limit} optimal allocations")]
    EnumerationOverflow { limit: usize, partial: Vec<Allocation> },
    #[error("generation failed after {attempts} attempts")]
    Generation { attempts: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Short machine-readable name of the failure.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidReference(_) => "invalid-reference",
            Error::InvalidMarket(_) => "invalid-market",
            Error::InvalidAllocation(_) => "invalid-allocation",
            Error::AssumptionViolation(_) => "assumption-violation",
            Error::Degenerate(_) => "degenerate",
            Error::Precondition(_) => "precondition",
            Error::UnsupportedRegime(_) => "unsupported-regime",
            Error::Size(_) => "size",
            Error::Range(_) => "range",
            Error::EnumerationOverflow { .. } => "enumeration-overflow",
            Error::Generation { .. } => "generation",
            Error::Parse(_) => "parse",
            Error::Internal(_) => "internal",
        }
    }

    /// Process exit code used by the command-line front end.
    ///
    /// 1 is reserved for a rejected price vector, which is not an error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_)
            | Error::InvalidReference(_)
            | Error::InvalidMarket(_)
            | Error::InvalidAllocation(_)
            | Error::AssumptionViolation(_)
            | Error::Degenerate(_)
            | Error::Precondition(_) => 2,
            Error::UnsupportedRegime(_)
            | Error::Size(_)
            | Error::EnumerationOverflow { .. }
            | Error::Generation { .. } => 3,
            Error::Range(_) | Error::Internal(_) => 4,
        }
    }
}
