//! Multilevel cross-entropy optimization of the biased sampling density.
//!
//! The optimal zero-variance density is proportional to the indicator times
//! the true density, normalized by the unknown probability, so it cannot be
//! sampled. Within the exponential family the Kullback-Leibler projection of
//! that density has a closed-form solution: each biased scale is the
//! weighted mean of the corresponding branch component over samples inside
//! the target region. Because the target region is far too rare to hit from
//! the initial scales, the iteration walks a sequence of adaptive levels:
//! each level is the pilot rho-quantile of the sum, floored at the target
//! threshold, and the loop stops the first time the floor is reached.
//!
//! The iteration is sequential by construction (each parameter vector feeds
//! the next pilot stage); the pilot sampling inside one iteration is small
//! enough that it is not worth partitioning.

use serde::{Deserialize, Serialize};

use crate::distributions::{log_likelihood_ratio_unchecked, sample_biased_into, BiasedParams};
use crate::error::{Error, Result};
use crate::estimators::{count_hits, Scenario};
use crate::rng::RngStream;

/// Pilot streams start far above the estimator chunk ids so a shared master
/// seed cannot alias production samples.
const PILOT_STREAM_BASE: u64 = 1 << 32;

fn default_rho() -> f64 {
    0.01
}
fn default_n_pilot() -> u64 {
    10_000
}
fn default_max_iter() -> usize {
    50
}

/// Cross-entropy iteration parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CEConfig {
    /// Rarity parameter: fraction of pilot samples defining each level.
    #[serde(default = "default_rho")]
    pub rho: f64,
    /// Pilot samples per iteration; may be smaller than the production run.
    #[serde(default = "default_n_pilot")]
    pub n_pilot: u64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for CEConfig {
    fn default() -> Self {
        CEConfig {
            rho: default_rho(),
            n_pilot: default_n_pilot(),
            max_iter: default_max_iter(),
            seed: 0,
        }
    }
}

impl CEConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::validation(format!(
                "rho must lie strictly between 0 and 1, got {}",
                self.rho
            )));
        }
        if self.n_pilot == 0 {
            return Err(Error::validation("n_pilot must be at least 1"));
        }
        if self.rho * (self.n_pilot as f64) < 1.0 {
            return Err(Error::validation(format!(
                "rho * n_pilot must be at least 1, got {}",
                self.rho * self.n_pilot as f64
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::validation("max_iter must be at least 1"));
        }
        Ok(())
    }
}

/// One recorded iteration of the optimizer.
#[derive(Debug, Clone, Serialize)]
pub struct CEIteration {
    /// Iteration counter, starting at 1.
    pub t: usize,
    /// Adaptive level after flooring at the target threshold.
    pub gamma_hat: f64,
    /// Updated biased scales.
    pub nu_hat: Vec<f64>,
    /// Fraction of pilot samples at or below the level.
    pub hit_fraction: f64,
}

/// Full iteration history of one optimizer run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct CETrace {
    pub iterations: Vec<CEIteration>,
}

/// The `ceil(rho n)`-th smallest of `sums`: the level below which a fraction
/// `rho` of the pilot mass sits. Equal sums are resolved by input order,
/// which cannot change the selected value but pins the implementation.
pub fn adaptive_level(sums: &[f64], rho: f64) -> Result<f64> {
    if sums.is_empty() {
        return Err(Error::domain("adaptive level needs a non-empty sample"));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::domain(format!(
            "rho must lie strictly between 0 and 1, got {rho}"
        )));
    }
    let n = sums.len();
    let k = ((rho * n as f64).ceil() as usize).clamp(1, n);
    let mut sorted = sums.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted[k - 1])
}

/// Closed-form exponential-family update: for each branch, the
/// weight-normalized mean of the branch component over samples whose sum is
/// at or below `level`.
///
/// Weights are exponentiated after subtracting the largest log-weight among
/// qualifying samples; the ratio is invariant to that shift, so no weight
/// can overflow and at least one weight is exactly 1.
pub fn ce_update(samples: &[Vec<f64>], log_weights: &[f64], level: f64) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::domain("ce_update needs a non-empty sample"));
    }
    if samples.len() != log_weights.len() {
        return Err(Error::LengthMismatch {
            context: "samples vs log weights",
            expected: samples.len(),
            got: log_weights.len(),
        });
    }
    let l = samples[0].len();
    if l == 0 || samples.iter().any(|x| x.len() != l) {
        return Err(Error::domain(
            "samples must be non-empty vectors of equal length",
        ));
    }
    let hit = |x: &Vec<f64>| x.iter().sum::<f64>() <= level;
    let max_lw = samples
        .iter()
        .zip(log_weights)
        .filter(|(x, _)| hit(x))
        .map(|(_, &lw)| lw)
        .fold(f64::NEG_INFINITY, f64::max);
    if max_lw == f64::NEG_INFINITY {
        return Err(Error::DegenerateUpdate { level });
    }
    let mut denom = 0.0f64;
    let mut numer = vec![0.0f64; l];
    for (x, &lw) in samples.iter().zip(log_weights) {
        if !hit(x) {
            continue;
        }
        let w = (lw - max_lw).exp();
        denom += w;
        for (acc, &xi) in numer.iter_mut().zip(x) {
            *acc += w * xi;
        }
    }
    Ok(numer.into_iter().map(|num| num / denom).collect())
}

/// Runs the multilevel iteration: starting from the true exponential scales,
/// repeatedly draw a pilot sample at the current scales, lower the level to
/// the pilot rho-quantile (floored at `gamma0`), and re-solve the update.
/// Returns the optimized scales together with the full trace; the final
/// recorded level always equals `gamma0` exactly.
pub fn ce_optimize(
    scenario: &Scenario,
    gamma0: f64,
    cfg: &CEConfig,
) -> Result<(BiasedParams, CETrace)> {
    scenario.validate()?;
    cfg.validate()?;
    if !(gamma0.is_finite() && gamma0 > 0.0) {
        return Err(Error::domain(format!(
            "gamma0 must be strictly positive, got {gamma0}"
        )));
    }
    let branches = &scenario.branches;
    let n = cfg.n_pilot as usize;
    let mut nu = BiasedParams::new(scenario.lambda_vector())?;
    let mut trace = CETrace::default();
    let mut last_level = f64::INFINITY;

    for t in 1..=cfg.max_iter {
        let mut rng = RngStream::new(cfg.seed, PILOT_STREAM_BASE + t as u64);
        let mut samples: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut sums: Vec<f64> = Vec::with_capacity(n);
        let mut log_weights: Vec<f64> = Vec::with_capacity(n);
        let mut buf: Vec<f64> = Vec::with_capacity(branches.len());
        for _ in 0..n {
            sample_biased_into(&nu, &mut rng, &mut buf);
            sums.push(buf.iter().sum());
            log_weights.push(log_likelihood_ratio_unchecked(&buf, branches, nu.nu()));
            samples.push(buf.clone());
        }

        let raw_level = adaptive_level(&sums, cfg.rho)?;
        let level = raw_level.max(gamma0);
        last_level = level;
        let nu_next = ce_update(&samples, &log_weights, level)?;
        let hit_fraction = count_hits(&sums, level) as f64 / n as f64;
        trace.iterations.push(CEIteration {
            t,
            gamma_hat: level,
            nu_hat: nu_next.clone(),
            hit_fraction,
        });
        nu = BiasedParams::new(nu_next)?;
        if level == gamma0 {
            return Ok((nu, trace));
        }
    }
    Err(Error::NoConvergence {
        iterations: cfg.max_iter,
        last_level,
        target: gamma0,
    })
}
