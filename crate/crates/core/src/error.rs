use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The state left the admissible set (non-positive density or energy).
    #[error("inadmissible state: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    /// Boundary operation requested on a mesh without a boundary.
    #[error("topology error: {0}")]
    Topology(String),
    #[error("time step failed: {0}")]
    Step(String),
    #[error("nonlinear solve did not converge: {0}")]
    Convergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
