use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of a formula (nonpositive SNR,
    /// probability outside (0, 1), ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The constraint set is empty: no blocklength split or power level can
    /// satisfy it.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A precondition of a specialised solver path does not hold; callers are
    /// expected to fall back to the general path.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{what} did not converge within {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("failed to write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn infeasible(msg: impl Into<String>) -> Self {
        Error::Infeasible(msg.into())
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible(_))
    }
}
