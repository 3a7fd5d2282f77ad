//! Error type shared by every module.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("invalid {name}: {reason}")]
    Domain { name: &'static str, reason: String },

    /// The requested combination has no defined behavior (e.g. a tuning
    /// recommendation for an estimator/regime pair that has none).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Adaptive quadrature ran out of its node budget.
    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e}")]
    Quadrature { estimate: f64, error_bound: f64 },

    #[error("malformed config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input rather than by a failing computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. } | Error::Unsupported(_) | Error::Config(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
