//! Naive Monte Carlo and importance-sampling estimators of the outage
//! probability `P(S_L <= gamma_0)`, with per-sample variance tracking.
//!
//! # Determinism and partitioning
//!
//! Samples are partitioned into fixed-size chunks of 2^16; chunk `c` draws
//! from the stream `(seed, c)` and chunks may be processed by any number of
//! worker threads. Because the partition is tied to chunk indices rather
//! than workers, the result is bit-identical for every thread count — the
//! worker count changes scheduling only, never the stream layout or the
//! estimator's distribution. Partial sums are merged associatively in chunk
//! order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{
    log_likelihood_ratio_unchecked, sample_biased_into, BiasedParams, BranchParams,
};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::CONFIDENCE_C;

/// Samples per RNG stream chunk.
const CHUNK_SIZE: u64 = 1 << 16;

/// An L-branch receiver configuration plus the threshold grid to sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub branches: Vec<BranchParams>,
    /// Es/N0 in dB.
    pub snr_per_symbol_db: f64,
    /// Threshold grid (gamma_th) in dB, strictly increasing.
    pub thresholds_db: Vec<f64>,
}

impl Scenario {
    pub fn num_branches(&self) -> usize {
        self.branches.len()
    }

    /// Biased scales equal to the exponential scales of the true densities;
    /// the cross-entropy iteration starts here.
    pub fn lambda_vector(&self) -> Vec<f64> {
        self.branches.iter().map(|p| p.lambda()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.branches.is_empty() {
            return Err(Error::validation(
                "scenario must have at least one branch (L >= 1)",
            ));
        }
        for (i, p) in self.branches.iter().enumerate() {
            p.validate()
                .map_err(|e| Error::validation(format!("branch {i}: {e}")))?;
        }
        if !self.snr_per_symbol_db.is_finite() {
            return Err(Error::validation(format!(
                "snr_per_symbol_db must be finite, got {}",
                self.snr_per_symbol_db
            )));
        }
        if self.thresholds_db.iter().any(|t| !t.is_finite()) {
            return Err(Error::validation("thresholds_db must be finite"));
        }
        for w in self.thresholds_db.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::validation(format!(
                    "thresholds_db must be strictly increasing, got {} before {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }
}

/// Outcome of one estimator run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateResult {
    /// Estimated probability.
    pub p_hat: f64,
    /// Sample mean of the squared per-sample term.
    pub second_moment: f64,
    /// Unbiased (n-1 denominator) sample variance of the per-sample term.
    pub variance: f64,
    /// Samples used.
    pub n: u64,
    /// `C * sqrt(variance / n) / p_hat` with C = 1.96, or +inf when
    /// `p_hat` = 0.
    pub relative_error: f64,
    /// Master seed of the run.
    pub seed: u64,
    /// Samples whose sum landed at or below the threshold.
    pub hit_count: u64,
}

/// Inclusive left-tail indicator shared by every estimator and the
/// cross-entropy level bookkeeping.
pub(crate) fn count_hits(sums: &[f64], gamma0: f64) -> u64 {
    sums.iter().filter(|&&s| s <= gamma0).count() as u64
}

/// Neumaier compensated accumulator; terms span many orders of magnitude at
/// n up to 1e7.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct Partial {
    term_sum: CompensatedSum,
    term_sq_sum: CompensatedSum,
    hits: u64,
}

impl Partial {
    fn merge(&mut self, other: &Partial) {
        self.term_sum.add(other.term_sum.sum);
        self.term_sum.add(other.term_sum.comp);
        self.term_sq_sum.add(other.term_sq_sum.sum);
        self.term_sq_sum.add(other.term_sq_sum.comp);
        self.hits += other.hits;
    }
}

enum Mode<'a> {
    Naive,
    Biased(&'a BiasedParams),
}

fn run_chunked(scenario: &Scenario, gamma0: f64, n: u64, seed: u64, mode: &Mode<'_>) -> Partial {
    let branches = &scenario.branches;
    let n_chunks = n.div_ceil(CHUNK_SIZE);
    let partials: Vec<Partial> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let count = CHUNK_SIZE.min(n - chunk * CHUNK_SIZE);
            let mut rng = RngStream::new(seed, chunk);
            let mut xs: Vec<f64> = Vec::with_capacity(branches.len());
            let mut acc = Partial::default();
            for _ in 0..count {
                match mode {
                    Mode::Naive => {
                        xs.clear();
                        xs.extend(branches.iter().map(|p| p.sample_unchecked(&mut rng)));
                        let s: f64 = xs.iter().sum();
                        if s <= gamma0 {
                            acc.hits += 1;
                            acc.term_sum.add(1.0);
                            acc.term_sq_sum.add(1.0);
                        }
                    }
                    Mode::Biased(nu) => {
                        sample_biased_into(nu, &mut rng, &mut xs);
                        let s: f64 = xs.iter().sum();
                        if s <= gamma0 {
                            // exponentiate the log ratio only here, at
                            // accumulation
                            let w = log_likelihood_ratio_unchecked(&xs, branches, nu.nu()).exp();
                            acc.hits += 1;
                            acc.term_sum.add(w);
                            acc.term_sq_sum.add(w * w);
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = Partial::default();
    for p in &partials {
        total.merge(p);
    }
    total
}

fn finalize(total: &Partial, n: u64, seed: u64) -> EstimateResult {
    let nf = n as f64;
    let p_hat = total.term_sum.total() / nf;
    let second_moment = total.term_sq_sum.total() / nf;
    let variance = if n > 1 {
        ((second_moment - p_hat * p_hat) * nf / (nf - 1.0)).max(0.0)
    } else {
        0.0
    };
    let relative_error = if p_hat > 0.0 {
        CONFIDENCE_C * (variance / nf).sqrt() / p_hat
    } else {
        f64::INFINITY
    };
    EstimateResult {
        p_hat,
        second_moment,
        variance,
        n,
        relative_error,
        seed,
        hit_count: total.hits,
    }
}

fn validate_inputs(scenario: &Scenario, gamma0: f64, n: u64) -> Result<()> {
    scenario.validate()?;
    if !(gamma0.is_finite() && gamma0 > 0.0) {
        return Err(Error::domain(format!(
            "gamma0 must be strictly positive, got {gamma0}"
        )));
    }
    if n == 0 {
        return Err(Error::domain("sample count n must be at least 1"));
    }
    Ok(())
}

/// Direct indicator-averaging estimator, sampling from the true branch
/// densities. A zero-hit run is a valid degenerate outcome: `p_hat` = 0 with
/// an infinite relative error, so sweeps over unreachable thresholds still
/// complete.
pub fn naive_mc(scenario: &Scenario, gamma0: f64, n: u64, seed: u64) -> Result<EstimateResult> {
    validate_inputs(scenario, gamma0, n)?;
    let total = run_chunked(scenario, gamma0, n, seed, &Mode::Naive);
    Ok(finalize(&total, n, seed))
}

/// Importance-sampling estimator: samples from the biased exponential
/// product density at `nu` and reweights by the likelihood ratio.
///
/// Errors with [`Error::DegenerateEstimate`] when no sample reaches the
/// target region — the signature of a badly chosen `nu` or an unreachable
/// level.
pub fn is_estimate(
    scenario: &Scenario,
    gamma0: f64,
    nu: &BiasedParams,
    n: u64,
    seed: u64,
) -> Result<EstimateResult> {
    validate_inputs(scenario, gamma0, n)?;
    if nu.len() != scenario.num_branches() {
        return Err(Error::LengthMismatch {
            context: "biased scales vs branches",
            expected: scenario.num_branches(),
            got: nu.len(),
        });
    }
    let total = run_chunked(scenario, gamma0, n, seed, &Mode::Biased(nu));
    if total.hits == 0 {
        return Err(Error::DegenerateEstimate { n });
    }
    Ok(finalize(&total, n, seed))
}
