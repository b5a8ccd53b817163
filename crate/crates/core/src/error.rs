use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Paired inputs have inconsistent lengths.
    #[error("length mismatch: {context} (expected {expected}, got {got})")]
    LengthMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// An importance-sampling run produced no samples in the target region,
    /// so the estimate carries no information about the tail.
    #[error("degenerate estimate: no sample reached the target region (n = {n})")]
    DegenerateEstimate { n: u64 },

    /// A cross-entropy update had no sample satisfying the level indicator.
    #[error("degenerate update: no pilot sample at or below level {level}")]
    DegenerateUpdate { level: f64 },

    /// The cross-entropy iteration hit its iteration cap before the adaptive
    /// level reached the target threshold.
    #[error(
        "no convergence after {iterations} iterations (last level {last_level}, target {target})"
    )]
    NoConvergence {
        iterations: usize,
        last_level: f64,
        target: f64,
    },

    /// Quadrature failed to reach its declared error target within budget.
    #[error("quadrature not converged: estimated error {err:.3e} above target {target:.3e}")]
    QuadratureNotConverged { err: f64, target: f64 },

    /// A configuration file could not be parsed.
    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    /// A configuration violated one of its invariants.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
