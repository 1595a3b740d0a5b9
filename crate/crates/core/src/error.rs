use thiserror::Error;

/// Errors raised by the solvers and diagnostics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The backward characteristic map is not a contraction for this step,
    /// or the foot-point iteration failed to converge.
    #[error("characteristics diverged: {0}")]
    CharacteristicsDiverged(String),

    #[error("Cole-Hopf overflow risk: max|S0|/(2 eps^2) = {ratio:.6e} exceeds {limit}")]
    OverflowRisk { ratio: f64, limit: f64 },

    #[error("Cole-Hopf log domain error: w + 1 = {value:.6e} at node {node}")]
    LogDomainError { node: usize, value: f64 },

    #[error("degenerate reference: {0}")]
    DegenerateReference(String),

    #[error("step {step} (t = {time:.6e}): {source}")]
    AtStep {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Strips any step annotation and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
