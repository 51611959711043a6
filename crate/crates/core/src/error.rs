use thiserror::Error;

use crate::avi::AviStatus;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    Parameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// A hypothesis needed for the convergence certificate does not hold.
    /// `condition` names the violated inequality, e.g. `bK ≤ 1/2`.
    #[error("no certificate: {condition} violated ({detail})")]
    NoCertificate { condition: String, detail: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("singular matrix in {0}")]
    Singular(String),

    /// The problem is not strongly regular at the point where it was checked.
    #[error("regularity failure: {0}")]
    Regularity(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("affine subproblem failed ({status:?}): {context}")]
    Subproblem { status: AviStatus, context: String },

    #[error("size guard: {0}")]
    Guard(String),
}

impl Error {
    pub(crate) fn dim(context: &'static str, expected: usize, found: usize) -> Self {
        Error::Dimension {
            context,
            expected,
            found,
        }
    }

    pub(crate) fn no_certificate(condition: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::NoCertificate {
            condition: condition.into(),
            detail: detail.into(),
        }
    }
}
