use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// The argument lies outside the moment generating function's domain
    /// (moment explosion). Distinct from numerical failure.
    #[error("outside the MGF domain: {0}")]
    OutsideDomain(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Self::InvalidInput(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Self::OutsideDomain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Self::Numerical(msg.into())
    }

    /// True for moment-explosion outcomes.
    pub fn is_outside_domain(&self) -> bool {
        matches!(self, Self::OutsideDomain(_))
    }
}

pub type Result<V, E = Error> = std::result::Result<V, E>;
