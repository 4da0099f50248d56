//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by model construction, estimation and inference.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A parameter lies outside its admissible domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A function argument lies outside the domain the function is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// The input series does not carry enough information for the requested
    /// computation (too short, constant, all zero, ...).
    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    /// A closed-form estimator has no real solution for this sample
    /// (negative radicand, zero denominator, ...).
    #[error("estimator undefined on this sample: {0}")]
    EstimatorUndefined(String),

    /// A numeric routine failed to reach its target (summation cap hit,
    /// fixed point not reached, singular linear system).
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateSeries(msg.into())
    }

    pub(crate) fn undefined(msg: impl Into<String>) -> Self {
        Error::EstimatorUndefined(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
