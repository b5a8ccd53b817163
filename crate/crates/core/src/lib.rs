//! Rare-event estimation of left-tail outage probabilities for diversity
//! receivers over bimodal fading channels.
//!
//! The combined SNR of an L-branch maximum-ratio-combining receiver is
//! proportional to a sum of independent fading powers, each following a
//! bimodal exponential-lognormal or exponential-generalized-Gamma mixture.
//! This crate estimates `P(S_L <= gamma_0)` down to the 1e-11 range by
//! importance sampling from a product of exponentials whose scales are tuned
//! with the multilevel cross-entropy method, and quantifies the sample-count
//! advantage over naive Monte Carlo at a fixed accuracy target.
//!
//! Modules:
//! - [`distributions`]: true branch densities, the biased exponential family,
//!   sampling, and log-likelihood ratios.
//! - [`estimators`]: naive Monte Carlo and importance-sampling estimators
//!   with variance tracking.
//! - [`ce`]: the multilevel cross-entropy optimizer for the biased scales.
//! - [`efficiency`]: runs-required-for-accuracy comparisons.
//! - [`oracle`]: closed forms and deterministic quadrature used as ground
//!   truth in tests; independent of the estimator code paths.
//! - [`runner`]: configuration, Table-driven presets, threshold sweeps, and
//!   CSV output.

pub mod ce;
pub mod distributions;
pub mod efficiency;
pub mod error;
pub mod estimators;
pub mod oracle;
pub mod rng;
pub mod runner;

pub use error::{Error, Result};

/// Confidence constant for reported relative errors (95% two-sided).
pub const CONFIDENCE_C: f64 = 1.96;
