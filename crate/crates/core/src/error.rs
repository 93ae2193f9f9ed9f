use thiserror::Error;

use crate::domain::Constraint;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what}: requested {requested}, bound is {bound}")]
    SizeLimit {
        what: &'static str,
        requested: u64,
        bound: u64,
    },

    #[error("dimension mismatch: expected n = {expected}, found n = {found}")]
    Dimension { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("pole: {0}")]
    Pole(String),

    #[error("divergence: {0}")]
    Divergence(String),

    #[error("outside the convergence region; violated constraint: {0}")]
    Convergence(Box<Constraint>),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("undecidable at depth {depth}: {detail}")]
    Saturated { depth: usize, detail: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    /// Errors that stem from the mathematical domain of the inputs rather
    /// than from resource bounds or malformed syntax.
    pub fn is_domain_like(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::Pole(_)
                | Error::Divergence(_)
                | Error::Convergence(_)
                | Error::Precondition(_)
                | Error::Saturated { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
