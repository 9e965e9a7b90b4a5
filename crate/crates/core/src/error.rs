use thiserror::Error;

/// Errors produced by the simulation and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a precondition: non-finite angle, unnormalized
    /// pump amplitudes, out-of-range coherence, malformed scan grid, ...
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A model parameter vector is outside the model's domain
    /// (e.g. non-positive width or fringe period).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation was applied to a value in the wrong state
    /// (e.g. extracting a visibility from a fit that did not converge).
    #[error("invalid state: {0}")]
    InvalidState(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn state(msg: impl Into<String>) -> Self {
        Error::InvalidState(msg.into())
    }
}
