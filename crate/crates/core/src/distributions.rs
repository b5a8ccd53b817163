//! True branch densities and the exponential biased family.
//!
//! Each diversity branch fades according to a bimodal mixture: an
//! exponential body with weight `omega` plus either a lognormal or a
//! generalized-Gamma component with weight `1 - omega`. The biased sampling
//! family is a product of per-branch exponentials; reweighting happens
//! through log-likelihood ratios that stay in log space until the estimator
//! accumulates them.

use rand::Rng;
use rand_distr::{Distribution as _, Gamma, Open01, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Floor applied to component log-densities before log-sum so that extreme
/// tails produce a finite (subnormal-scale) density instead of `-inf`/NaN.
pub(crate) const LOG_FLOOR: f64 = -745.0;

const LN_2PI: f64 = 1.8378770664093453;

fn default_gg_scale() -> f64 {
    1.0
}

/// Per-branch fading power distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model")]
pub enum BranchParams {
    /// `omega * Exp(lambda) + (1 - omega) * LogNormal(mu, sigma^2)`.
    #[serde(rename = "exp-ln")]
    ExpLogNormal {
        omega: f64,
        lambda: f64,
        mu: f64,
        sigma: f64,
    },
    /// `omega * Exp(lambda) + (1 - omega) * GenGamma(alpha, beta, gg_scale)`.
    ///
    /// The generalized-Gamma component has density
    /// `beta (alpha/gg_scale)^alpha x^(alpha beta - 1)
    ///  exp(-(alpha/gg_scale) x^beta) / Gamma(alpha)`,
    /// i.e. `X = (gg_scale * G / alpha)^(1/beta)` with `G ~ Gamma(alpha, 1)`.
    #[serde(rename = "exp-gg")]
    ExpGenGamma {
        omega: f64,
        lambda: f64,
        alpha: f64,
        beta: f64,
        #[serde(default = "default_gg_scale")]
        gg_scale: f64,
    },
}

impl BranchParams {
    /// Mixture weight of the exponential component.
    pub fn omega(&self) -> f64 {
        match *self {
            BranchParams::ExpLogNormal { omega, .. } => omega,
            BranchParams::ExpGenGamma { omega, .. } => omega,
        }
    }

    /// Scale of the exponential component.
    pub fn lambda(&self) -> f64 {
        match *self {
            BranchParams::ExpLogNormal { lambda, .. } => lambda,
            BranchParams::ExpGenGamma { lambda, .. } => lambda,
        }
    }

    /// Largest scale among the components; used to size integration cutoffs.
    pub fn max_scale(&self) -> f64 {
        match *self {
            BranchParams::ExpLogNormal {
                lambda, mu, sigma, ..
            } => lambda.max((mu + sigma * sigma).exp()),
            BranchParams::ExpGenGamma {
                lambda,
                alpha,
                beta,
                gg_scale,
                ..
            } => lambda.max((gg_scale / alpha).powf(1.0 / beta).max(gg_scale)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check_pos = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::domain(format!(
                    "branch parameter {name} must be strictly positive and finite, got {v}"
                )))
            }
        };
        let omega = self.omega();
        if !(0.0..=1.0).contains(&omega) {
            return Err(Error::domain(format!(
                "mixture weight omega must lie in [0, 1], got {omega}"
            )));
        }
        check_pos("lambda", self.lambda())?;
        match *self {
            BranchParams::ExpLogNormal { mu, sigma, .. } => {
                if !mu.is_finite() {
                    return Err(Error::domain(format!("mu must be finite, got {mu}")));
                }
                check_pos("sigma", sigma)
            }
            BranchParams::ExpGenGamma {
                alpha,
                beta,
                gg_scale,
                ..
            } => {
                check_pos("alpha", alpha)?;
                check_pos("beta", beta)?;
                check_pos("gg_scale", gg_scale)
            }
        }
    }

    /// Log-density without argument checks; callers guarantee `x > 0` and a
    /// validated parameter set.
    pub(crate) fn log_pdf_unchecked(&self, x: f64) -> f64 {
        let omega = self.omega();
        let lambda = self.lambda();
        let log_exp_comp = omega.ln() - lambda.ln() - x / lambda;
        let log_other_comp = match *self {
            BranchParams::ExpLogNormal { mu, sigma, .. } => {
                let z = (x.ln() - mu) / sigma;
                (1.0 - omega).ln() - x.ln() - sigma.ln() - 0.5 * LN_2PI - 0.5 * z * z
            }
            BranchParams::ExpGenGamma {
                alpha,
                beta,
                gg_scale,
                ..
            } => {
                let rate = alpha / gg_scale;
                (1.0 - omega).ln() + beta.ln() + alpha * rate.ln() + (alpha * beta - 1.0) * x.ln()
                    - rate * x.powf(beta)
                    - ln_gamma(alpha)
            }
        };
        log_sum_exp2(log_exp_comp.max(LOG_FLOOR), log_other_comp.max(LOG_FLOOR))
    }

    pub(crate) fn sample_unchecked(&self, rng: &mut RngStream) -> f64 {
        // The component pick consumes no uniform at omega = 0 or 1, so the
        // degenerate omega = 1 configuration shares its stream layout with
        // the biased exponential sampler.
        let omega = self.omega();
        let pick_exponential = if omega >= 1.0 {
            true
        } else if omega <= 0.0 {
            false
        } else {
            rng.random::<f64>() < omega
        };
        if pick_exponential {
            return exp_inv_cdf(self.lambda(), rng);
        }
        match *self {
            BranchParams::ExpLogNormal { mu, sigma, .. } => {
                let z: f64 = StandardNormal.sample(rng);
                (mu + sigma * z).exp()
            }
            BranchParams::ExpGenGamma {
                alpha,
                beta,
                gg_scale,
                ..
            } => {
                let g = Gamma::new(alpha, 1.0).expect("validated shape").sample(rng);
                (gg_scale * g / alpha).powf(1.0 / beta)
            }
        }
    }
}

/// Per-branch exponential scales of the biased sampling density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasedParams {
    nu: Vec<f64>,
}

impl BiasedParams {
    pub fn new(nu: Vec<f64>) -> Result<Self> {
        if nu.is_empty() {
            return Err(Error::domain("biased parameter vector must be non-empty"));
        }
        for (i, &v) in nu.iter().enumerate() {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!(
                    "biased scale nu[{i}] must be strictly positive and finite, got {v}"
                )));
            }
        }
        Ok(BiasedParams { nu })
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn len(&self) -> usize {
        self.nu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nu.is_empty()
    }
}

/// Numerically stable `ln(e^a + e^b)` for finite inputs.
fn log_sum_exp2(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Inverse-CDF exponential draw, strictly positive.
fn exp_inv_cdf(scale: f64, rng: &mut RngStream) -> f64 {
    let u: f64 = Open01.sample(rng);
    -scale * u.ln()
}

/// Natural log of the true branch density at `x`.
pub fn mixture_log_pdf(p: &BranchParams, x: f64) -> Result<f64> {
    p.validate()?;
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::domain(format!(
            "mixture density evaluated outside support (0, inf): x = {x}"
        )));
    }
    Ok(p.log_pdf_unchecked(x))
}

/// Draws one variate from the true branch mixture.
pub fn sample_branch(p: &BranchParams, rng: &mut RngStream) -> Result<f64> {
    p.validate()?;
    Ok(p.sample_unchecked(rng))
}

/// Log-density of the biased exponential marginal: `-ln(nu) - x/nu`.
pub fn biased_log_pdf(nu_l: f64, x: f64) -> Result<f64> {
    if !(nu_l.is_finite() && nu_l > 0.0) {
        return Err(Error::domain(format!(
            "biased scale must be strictly positive, got {nu_l}"
        )));
    }
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::domain(format!(
            "biased density evaluated outside support [0, inf): x = {x}"
        )));
    }
    Ok(biased_log_pdf_unchecked(nu_l, x))
}

pub(crate) fn biased_log_pdf_unchecked(nu_l: f64, x: f64) -> f64 {
    -nu_l.ln() - x / nu_l
}

/// Draws one vector with independent components `X_l ~ Exp(nu_l)`.
pub fn sample_biased(nu: &BiasedParams, rng: &mut RngStream) -> Vec<f64> {
    nu.nu.iter().map(|&s| exp_inv_cdf(s, rng)).collect()
}

pub(crate) fn sample_biased_into(nu: &BiasedParams, rng: &mut RngStream, out: &mut Vec<f64>) {
    out.clear();
    out.extend(nu.nu.iter().map(|&s| exp_inv_cdf(s, rng)));
}

/// Log of the importance weight `f(x) / f*_nu(x)` for one sampled vector.
///
/// Estimators exponentiate this log-sum only when the sample actually
/// contributes, so intermediate underflow never zeroes a usable weight.
pub fn log_likelihood_ratio(
    x: &[f64],
    branches: &[BranchParams],
    nu: &BiasedParams,
) -> Result<f64> {
    if x.len() != branches.len() {
        return Err(Error::LengthMismatch {
            context: "sample vector vs branches",
            expected: branches.len(),
            got: x.len(),
        });
    }
    if nu.len() != branches.len() {
        return Err(Error::LengthMismatch {
            context: "biased scales vs branches",
            expected: branches.len(),
            got: nu.len(),
        });
    }
    for p in branches {
        p.validate()?;
    }
    for (i, &xi) in x.iter().enumerate() {
        if !(xi.is_finite() && xi > 0.0) {
            return Err(Error::domain(format!(
                "sample component x[{i}] must be strictly positive, got {xi}"
            )));
        }
    }
    Ok(log_likelihood_ratio_unchecked(x, branches, nu.nu()))
}

pub(crate) fn log_likelihood_ratio_unchecked(
    x: &[f64],
    branches: &[BranchParams],
    nu: &[f64],
) -> f64 {
    let mut acc = 0.0;
    for ((&xi, p), &nu_l) in x.iter().zip(branches).zip(nu) {
        acc += p.log_pdf_unchecked(xi) - biased_log_pdf_unchecked(nu_l, xi);
    }
    acc
}

/// Converts a threshold and per-symbol SNR, both in dB, to the linear-scale
/// sum threshold `gamma_0 = gamma_th / (Es/N0)`.
pub fn threshold_linear(gamma_th_db: f64, snr_per_symbol_db: f64) -> f64 {
    10f64.powf(gamma_th_db / 10.0) / 10f64.powf(snr_per_symbol_db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn table1_expln_branch1() -> BranchParams {
        BranchParams::ExpLogNormal {
            omega: 0.2045,
            lambda: 0.5389,
            mu: 0.1117,
            sigma: 0.0253,
        }
    }

    fn table1_expgg_branch1() -> BranchParams {
        BranchParams::ExpGenGamma {
            omega: 0.4876,
            lambda: 0.5389,
            alpha: 3.275,
            beta: 1.45,
            gg_scale: 1.0,
        }
    }

    #[test]
    fn pure_exponential_density_at_origin_limit() {
        let p = BranchParams::ExpLogNormal {
            omega: 1.0,
            lambda: 1.0,
            mu: 0.0,
            sigma: 1.0,
        };
        // density -> 1 as x -> 0+, so the log tends to 0
        let v = mixture_log_pdf(&p, 1e-12).unwrap();
        assert!(v.abs() < 1e-10, "log pdf near origin was {v}");
    }

    #[test]
    fn pure_lognormal_density_at_one() {
        let p = BranchParams::ExpLogNormal {
            omega: 0.0,
            lambda: 1.0,
            mu: 0.0,
            sigma: 1.0,
        };
        let v = mixture_log_pdf(&p, 1.0).unwrap();
        let expected = -(0.5 * LN_2PI); // log(1/sqrt(2 pi))
        assert!((v - expected).abs() < 1e-12, "got {v}, want {expected}");
    }

    #[test]
    fn table1_mixture_log_pdf_matches_direct_evaluation() {
        // Independently evaluated in 50-digit arithmetic from the closed form.
        let v = mixture_log_pdf(&table1_expln_branch1(), 1.0).unwrap();
        assert!(
            (v - (-2.8122985149623007)).abs() < 1e-12,
            "log pdf at 1.0 was {v}"
        );
    }

    #[test]
    fn lognormal_component_underflow_does_not_poison_the_mixture() {
        // At x = 0.05 the lognormal component is ~exp(-7000); the exponential
        // component alone must carry the value.
        let v = mixture_log_pdf(&table1_expln_branch1(), 0.05).unwrap();
        assert!(
            (v - (-1.0617436415887156)).abs() < 1e-12,
            "log pdf at 0.05 was {v}"
        );
    }

    #[test]
    fn omega_one_collapses_to_the_biased_density() {
        let p = BranchParams::ExpLogNormal {
            omega: 1.0,
            lambda: 0.5389,
            mu: 0.1117,
            sigma: 0.0253,
        };
        for &x in &[1e-6, 0.01, 0.3, 1.0, 5.0, 50.0] {
            let a = mixture_log_pdf(&p, x).unwrap();
            let b = biased_log_pdf(0.5389, x).unwrap();
            assert_eq!(a.to_bits(), b.to_bits(), "mismatch at x = {x}");
        }
    }

    #[test]
    fn rejects_invalid_arguments() {
        let p = table1_expln_branch1();
        assert!(mixture_log_pdf(&p, 0.0).is_err());
        assert!(mixture_log_pdf(&p, -1.0).is_err());
        assert!(biased_log_pdf(0.0, 1.0).is_err());
        assert!(biased_log_pdf(1.0, -0.5).is_err());
        let bad = BranchParams::ExpLogNormal {
            omega: 1.5,
            lambda: 1.0,
            mu: 0.0,
            sigma: 1.0,
        };
        assert!(bad.validate().is_err());
        assert!(BiasedParams::new(vec![1.0, 0.0]).is_err());
        assert!(BiasedParams::new(vec![]).is_err());
    }

    #[test]
    fn biased_log_pdf_values() {
        assert_eq!(biased_log_pdf(1.0, 0.0).unwrap(), 0.0);
        assert_eq!(biased_log_pdf(1.0, 1.0).unwrap(), -1.0);
        let v = biased_log_pdf(0.5389, 0.01).unwrap();
        assert!((v - 0.5996689356162618).abs() < 1e-14, "got {v}");
    }

    #[test]
    fn pure_exponential_sample_mean() {
        let p = BranchParams::ExpLogNormal {
            omega: 1.0,
            lambda: 2.0,
            mu: 0.0,
            sigma: 1.0,
        };
        let mut rng = RngStream::new(11, 0);
        let n = 1_000_000;
        let mean: f64 = (0..n)
            .map(|_| sample_branch(&p, &mut rng).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 2.0).abs() < 0.01, "mean was {mean}");
    }

    #[test]
    fn pure_lognormal_sample_mean() {
        let p = BranchParams::ExpLogNormal {
            omega: 0.0,
            lambda: 1.0,
            mu: 0.0,
            sigma: 0.0253,
        };
        let mut rng = RngStream::new(12, 0);
        let n = 1_000_000;
        let mean: f64 = (0..n)
            .map(|_| sample_branch(&p, &mut rng).unwrap())
            .sum::<f64>()
            / n as f64;
        // exp(sigma^2 / 2)
        assert!(
            (mean - 1.000_320_096_219_865).abs() < 3e-4,
            "mean was {mean}"
        );
    }

    #[test]
    fn pure_generalized_gamma_sample_mean() {
        let p = BranchParams::ExpGenGamma {
            omega: 0.0,
            lambda: 1.0,
            alpha: 3.275,
            beta: 1.45,
            gg_scale: 1.0,
        };
        let mut rng = RngStream::new(13, 0);
        let n = 1_000_000;
        let mean: f64 = (0..n)
            .map(|_| sample_branch(&p, &mut rng).unwrap())
            .sum::<f64>()
            / n as f64;
        // E[X] = (gg_scale/alpha)^(1/beta) Gamma(alpha + 1/beta) / Gamma(alpha),
        // evaluated independently in 50-digit arithmetic.
        assert!((mean - 0.9685559960947364).abs() < 2e-3, "mean was {mean}");
    }

    #[test]
    fn biased_vector_component_means() {
        let nu = BiasedParams::new(vec![1.0, 1.0]).unwrap();
        let mut rng = RngStream::new(14, 0);
        let n = 1_000_000;
        let mut acc = [0.0f64; 2];
        for _ in 0..n {
            let x = sample_biased(&nu, &mut rng);
            acc[0] += x[0];
            acc[1] += x[1];
        }
        for (l, &s) in acc.iter().enumerate() {
            let mean = s / n as f64;
            assert!((mean - 1.0).abs() < 0.01, "component {l} mean was {mean}");
        }
    }

    #[test]
    fn biased_exponential_cdf_probe() {
        // For scale 2: the median sits at 2 ln 2 and the upper quartile at
        // 2 ln 4.
        let nu = BiasedParams::new(vec![2.0]).unwrap();
        let mut rng = RngStream::new(15, 0);
        let n = 1_000_000;
        let median = 2.0 * std::f64::consts::LN_2;
        let quartile = 2.0 * 4.0f64.ln();
        let mut below_median = 0u64;
        let mut below_quartile = 0u64;
        for _ in 0..n {
            let x = sample_biased(&nu, &mut rng)[0];
            if x <= median {
                below_median += 1;
            }
            if x <= quartile {
                below_quartile += 1;
            }
        }
        let frac_m = below_median as f64 / n as f64;
        let frac_q = below_quartile as f64 / n as f64;
        assert!((frac_m - 0.5).abs() < 0.005, "median fraction was {frac_m}");
        assert!(
            (frac_q - 0.75).abs() < 0.005,
            "quartile fraction was {frac_q}"
        );
    }

    #[test]
    fn biased_sampling_is_deterministic_per_stream() {
        let nu = BiasedParams::new(vec![0.3, 1.7, 0.9]).unwrap();
        let mut a = RngStream::new(99, 5);
        let mut b = RngStream::new(99, 5);
        for _ in 0..100 {
            assert_eq!(sample_biased(&nu, &mut a), sample_biased(&nu, &mut b));
        }
    }

    #[test]
    fn likelihood_ratio_vanishes_when_densities_coincide() {
        let branches = vec![
            BranchParams::ExpLogNormal {
                omega: 1.0,
                lambda: 0.7,
                mu: 0.0,
                sigma: 1.0,
            },
            BranchParams::ExpLogNormal {
                omega: 1.0,
                lambda: 1.3,
                mu: 0.0,
                sigma: 1.0,
            },
        ];
        let nu = BiasedParams::new(vec![0.7, 1.3]).unwrap();
        let llr = log_likelihood_ratio(&[0.2, 2.5], &branches, &nu).unwrap();
        assert_eq!(llr, 0.0);
    }

    #[test]
    fn likelihood_ratio_matches_direct_evaluation() {
        let branches = vec![table1_expln_branch1()];
        let nu = BiasedParams::new(vec![0.3]).unwrap();
        let llr = log_likelihood_ratio(&[0.05], &branches, &nu).unwrap();
        // mixture log pdf minus biased log pdf, 50-digit reference
        assert!((llr - (-2.099049779247985)).abs() < 1e-12, "llr was {llr}");
    }

    #[test]
    fn likelihood_ratio_closed_form_probe() {
        // omega = 1, lambda = 1, nu = 0.5: ratio(x) = exp(x)/2, so at ln 2 the
        // weight is exactly 1.
        let branches = vec![BranchParams::ExpLogNormal {
            omega: 1.0,
            lambda: 1.0,
            mu: 0.0,
            sigma: 1.0,
        }];
        let nu = BiasedParams::new(vec![0.5]).unwrap();
        let llr = log_likelihood_ratio(&[std::f64::consts::LN_2], &branches, &nu).unwrap();
        assert!(llr.abs() < 1e-15, "llr was {llr}");
    }

    #[test]
    fn likelihood_ratio_rejects_length_mismatch() {
        let branches = vec![table1_expln_branch1()];
        let nu = BiasedParams::new(vec![0.3, 0.4]).unwrap();
        assert!(log_likelihood_ratio(&[0.05], &branches, &nu).is_err());
    }

    #[test]
    fn threshold_conversion() {
        assert!((threshold_linear(0.0, 10.0) - 0.1).abs() < 1e-15);
        assert!((threshold_linear(-10.0, 10.0) - 0.01).abs() < 1e-15);
        assert!((threshold_linear(5.0, 10.0) - 0.31622776601683794).abs() < 1e-15);
    }

    #[test]
    fn kolmogorov_smirnov_against_closed_form_cdfs() {
        // Closed-form CDFs (normal CDF / regularized incomplete gamma) are an
        // independent route from the samplers.
        use statrs::distribution::{ContinuousCDF, Normal};
        use statrs::function::gamma::gamma_lr;

        type Cdf = Box<dyn Fn(f64) -> f64>;
        let normal = Normal::new(0.0, 1.0).unwrap();
        let cases: Vec<(BranchParams, Cdf)> = vec![
            (table1_expln_branch1(), {
                let n = normal;
                Box::new(move |x: f64| {
                    0.2045 * (1.0 - (-x / 0.5389).exp())
                        + (1.0 - 0.2045) * n.cdf((x.ln() - 0.1117) / 0.0253)
                })
            }),
            (
                table1_expgg_branch1(),
                Box::new(move |x: f64| {
                    0.4876 * (1.0 - (-x / 0.5389).exp())
                        + (1.0 - 0.4876) * gamma_lr(3.275, 3.275 * x.powf(1.45))
                }),
            ),
        ];
        for (case_idx, (p, cdf)) in cases.iter().enumerate() {
            let n = 100_000usize;
            let mut rng = RngStream::new(1000 + case_idx as u64, 0);
            let mut xs: Vec<f64> = (0..n)
                .map(|_| sample_branch(p, &mut rng).unwrap())
                .collect();
            xs.sort_by(f64::total_cmp);
            let mut d = 0.0f64;
            for (i, &x) in xs.iter().enumerate() {
                let f = cdf(x);
                d = d.max((f - i as f64 / n as f64).abs());
                d = d.max(((i + 1) as f64 / n as f64 - f).abs());
            }
            // 1% critical value of the KS statistic
            let crit = 1.628 / (n as f64).sqrt();
            assert!(d < crit, "case {case_idx}: KS statistic {d} >= {crit}");
        }
    }

    proptest! {
        #[test]
        fn weights_on_sampled_points_are_finite_and_positive(
            seed in 0u64..10_000,
            nus in proptest::collection::vec(1e-6f64..10.0, 1..4),
        ) {
            // Per-sample estimator terms evaluate the ratio only at points
            // drawn from the biased density itself.
            let branches: Vec<BranchParams> =
                (0..nus.len()).map(|_| table1_expln_branch1()).collect();
            let nu = BiasedParams::new(nus).unwrap();
            let mut rng = RngStream::new(seed, 0);
            for _ in 0..32 {
                let xs = sample_biased(&nu, &mut rng);
                let llr = log_likelihood_ratio(&xs, &branches, &nu).unwrap();
                let w = llr.exp();
                prop_assert!(w.is_finite(), "weight overflowed at {xs:?}");
                prop_assert!(w >= 0.0);
            }
        }

        #[test]
        fn threshold_linear_inverts(a in -30.0f64..30.0, b in -30.0f64..30.0) {
            let fwd = threshold_linear(a, b);
            let back = threshold_linear(b, a);
            prop_assert!((fwd * back - 1.0).abs() < 1e-10);
        }
    }
}
