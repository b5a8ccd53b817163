//! Sample-count requirements for a fixed accuracy target.
//!
//! For a relative accuracy `eps0` at confidence constant `c`, naive Monte
//! Carlo needs `N = P(1-P) (c/(P eps0))^2` samples while importance sampling
//! needs `N* = V* (c/(P eps0))^2`, where `V*` is the per-sample variance of
//! the weighted indicator under the biased density. `V*` is estimated from
//! the sample variance of an IS run at the optimized scales.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::EstimateResult;

/// Default relative accuracy requirement.
pub const DEFAULT_EPS0: f64 = 0.05;

/// Naive-vs-IS sample requirements at a fixed accuracy.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EfficiencyReport {
    /// Probability used as reference (typically the IS estimate).
    pub p_ref: f64,
    pub eps0: f64,
    pub c: f64,
    pub runs_naive: f64,
    pub runs_is: f64,
    /// `runs_naive / runs_is`.
    pub gain: f64,
}

impl EfficiencyReport {
    /// Builds the comparison from an IS run, using its estimate as the
    /// reference probability and its sample variance as `V*`.
    pub fn from_is_estimate(r: &EstimateResult, eps0: f64, c: f64) -> Result<Self> {
        let n = runs_naive(r.p_hat, eps0, c)?;
        let n_star = runs_is(r.variance, r.p_hat, eps0, c)?;
        Ok(EfficiencyReport {
            p_ref: r.p_hat,
            eps0,
            c,
            runs_naive: n,
            runs_is: n_star,
            gain: n / n_star,
        })
    }
}

fn check_accuracy_params(eps0: f64, c: f64) -> Result<()> {
    if !(eps0.is_finite() && eps0 > 0.0) {
        return Err(Error::domain(format!(
            "eps0 must be strictly positive, got {eps0}"
        )));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::domain(format!(
            "confidence constant c must be strictly positive, got {c}"
        )));
    }
    Ok(())
}

/// Samples needed by naive Monte Carlo: `p (1-p) (c / (p eps0))^2`.
pub fn runs_naive(p: f64, eps0: f64, c: f64) -> Result<f64> {
    check_accuracy_params(eps0, c)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!(
            "probability must lie strictly between 0 and 1, got {p}"
        )));
    }
    Ok(p * (1.0 - p) * (c / (p * eps0)).powi(2))
}

/// Samples needed by importance sampling: `variance (c / (p eps0))^2`.
pub fn runs_is(variance: f64, p: f64, eps0: f64, c: f64) -> Result<f64> {
    check_accuracy_params(eps0, c)?;
    if !(variance.is_finite() && variance >= 0.0) {
        return Err(Error::domain(format!(
            "variance must be nonnegative, got {variance}"
        )));
    }
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::domain(format!(
            "probability must be strictly positive, got {p}"
        )));
    }
    Ok(variance * (c / (p * eps0)).powi(2))
}

/// Confidence-interval half-width over the estimate; `+inf` sentinel when
/// the estimate is zero.
pub fn relative_error(r: &EstimateResult, c: f64) -> Result<f64> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::domain(format!(
            "confidence constant c must be strictly positive, got {c}"
        )));
    }
    if r.p_hat <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(c * (r.variance / r.n as f64).sqrt() / r.p_hat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{BiasedParams, BranchParams};
    use crate::estimators::{is_estimate, Scenario};

    fn result_with(p_hat: f64, variance: f64, n: u64) -> EstimateResult {
        EstimateResult {
            p_hat,
            second_moment: variance + p_hat * p_hat,
            variance,
            n,
            relative_error: 0.0,
            seed: 0,
            hit_count: 1,
        }
    }

    #[test]
    fn runs_naive_unit_case() {
        assert!((runs_naive(0.5, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn runs_naive_matches_reported_counts() {
        // Counts published for the 95% / 5% setting at the two reference
        // probabilities.
        let n = runs_naive(3.9186e-6, 0.05, 1.96).unwrap();
        assert!((n / 3.9214e8 - 1.0).abs() < 1e-3, "got {n}");
        let n = runs_naive(2.2133e-5, 0.05, 1.96).unwrap();
        assert!((n / 6.9427e7 - 1.0).abs() < 1e-3, "got {n}");
    }

    #[test]
    fn runs_is_unit_case() {
        let p = 0.37;
        assert!((runs_is(p * p, p, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        assert!(runs_naive(0.0, 0.05, 1.96).is_err());
        assert!(runs_naive(1.0, 0.05, 1.96).is_err());
        assert!(runs_naive(0.5, 0.0, 1.96).is_err());
        assert!(runs_is(-1.0, 0.5, 0.05, 1.96).is_err());
        assert!(runs_is(1.0, 0.0, 0.05, 1.96).is_err());
        assert!(relative_error(&result_with(0.5, 0.25, 100), 0.0).is_err());
    }

    #[test]
    fn relative_error_closed_form_and_sentinel() {
        let r = result_with(0.5, 0.25, 10_000);
        let v = relative_error(&r, 1.96).unwrap();
        assert!((v - 0.0196).abs() < 1e-12, "got {v}");
        let zero = result_with(0.0, 0.1, 10_000);
        assert!(relative_error(&zero, 1.96).unwrap().is_infinite());
    }

    #[test]
    fn relative_error_shrinks_like_inverse_sqrt_n() {
        let s = Scenario {
            branches: vec![BranchParams::ExpLogNormal {
                omega: 0.2045,
                lambda: 0.5389,
                mu: 0.1117,
                sigma: 0.0253,
            }],
            snr_per_symbol_db: 10.0,
            thresholds_db: vec![],
        };
        let nu = BiasedParams::new(vec![0.02]).unwrap();
        let mut scaled = Vec::new();
        for &n in &[1_000u64, 10_000, 100_000] {
            let r = is_estimate(&s, 0.01, &nu, n, 31).unwrap();
            let rel = relative_error(&r, 1.96).unwrap();
            scaled.push(rel * (n as f64).sqrt());
        }
        for w in scaled.windows(2) {
            assert!(
                (w[1] / w[0] - 1.0).abs() < 0.2,
                "sqrt-n scaled errors drifted: {scaled:?}"
            );
        }
    }

    #[test]
    fn report_combines_both_counts() {
        let r = result_with(1e-4, 2e-8, 10_000);
        let rep = EfficiencyReport::from_is_estimate(&r, 0.05, 1.96).unwrap();
        assert!((rep.gain - rep.runs_naive / rep.runs_is).abs() < 1e-9);
        assert!(rep.runs_naive > 0.0 && rep.runs_is > 0.0);
    }
}
