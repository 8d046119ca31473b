use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation was called with inadmissible parameters.
    /// The message names the violated constraint.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A numerical routine failed to converge or produced an inconsistent
    /// result (eigen-solver breakdown, non-integral dimension formula, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Adaptive quadrature could not meet the requested tolerance within its
    /// panel budget. Carries the achieved error estimate.
    #[error("quadrature tolerance not met: requested {requested:e}, achieved {achieved:e}")]
    Tolerance { requested: f64, achieved: f64 },

    /// The operation is not defined for the given inputs (e.g. point geometry
    /// on the Cayley plane, tail bounds on a spectrum without decay metadata).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Configuration validation; lists every violated field at once.
    #[error("invalid config: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }
}
