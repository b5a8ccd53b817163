//! Statistical invariants that cut across modules: bounded relative error
//! of the optimized estimator, variance dominance over naive Monte Carlo,
//! and the fixed-point property of the cross-entropy update.

use outage_sim::ce::{adaptive_level, ce_optimize, ce_update, CEConfig};
use outage_sim::distributions::{
    log_likelihood_ratio, sample_biased, threshold_linear, BiasedParams,
};
use outage_sim::efficiency::runs_is;
use outage_sim::estimators::{is_estimate, Scenario};
use outage_sim::rng::{derive_seed, RngStream};
use outage_sim::runner;

fn optimize(scenario: &Scenario, gamma0: f64, seed: u64) -> BiasedParams {
    let cfg = CEConfig {
        rho: 0.01,
        n_pilot: 10_000,
        max_iter: 50,
        seed,
    };
    ce_optimize(scenario, gamma0, &cfg).unwrap().0
}

/// The optimizer keeps the required IS sample count nearly flat over a grid
/// where the naive requirement explodes by five orders of magnitude.
#[test]
fn bounded_relative_error_probe_l4() {
    let scenario = runner::preset("exp-ln-l4").unwrap().scenario;
    let mut runs = Vec::new();
    for (i, &gamma_th_db) in scenario.thresholds_db.clone().iter().enumerate() {
        let gamma0 = threshold_linear(gamma_th_db, scenario.snr_per_symbol_db);
        let nu = optimize(&scenario, gamma0, derive_seed(9100, 1, i as u64));
        let r = is_estimate(
            &scenario,
            gamma0,
            &nu,
            10_000,
            derive_seed(9100, 2, i as u64),
        )
        .unwrap();
        runs.push((
            outage_sim::efficiency::runs_naive(r.p_hat, 0.05, 1.96).unwrap(),
            runs_is(r.variance, r.p_hat, 0.05, 1.96).unwrap(),
        ));
    }
    let max_is = runs.iter().map(|r| r.1).fold(f64::MIN, f64::max);
    let min_is = runs.iter().map(|r| r.1).fold(f64::MAX, f64::min);
    assert!(
        max_is / min_is < 2.5,
        "IS runs spread {:.2}x over the grid",
        max_is / min_is
    );
    let max_n = runs.iter().map(|r| r.0).fold(f64::MIN, f64::max);
    let min_n = runs.iter().map(|r| r.0).fold(f64::MAX, f64::min);
    assert!(
        max_n / min_n >= 1e5,
        "naive runs span only {:.1e}x",
        max_n / min_n
    );
}

/// At every threshold at or below 0 dB, the optimized IS variance beats the
/// naive Bernoulli variance p(1-p) by well over an order of magnitude.
#[test]
fn is_variance_dominates_naive_variance() {
    for preset in ["exp-ln-l2", "exp-ln-l4", "exp-gg-l2", "exp-gg-l4"] {
        let scenario = runner::preset(preset).unwrap().scenario;
        for (i, &gamma_th_db) in scenario
            .thresholds_db
            .clone()
            .iter()
            .filter(|&&t| t <= 0.0)
            .enumerate()
        {
            let gamma0 = threshold_linear(gamma_th_db, scenario.snr_per_symbol_db);
            let nu = optimize(&scenario, gamma0, derive_seed(9200, 1, i as u64));
            let r = is_estimate(
                &scenario,
                gamma0,
                &nu,
                10_000,
                derive_seed(9200, 2, i as u64),
            )
            .unwrap();
            let naive_variance = r.p_hat * (1.0 - r.p_hat);
            assert!(
                r.variance * 10.0 <= naive_variance,
                "{preset} at {gamma_th_db} dB: IS variance {} vs naive {naive_variance}",
                r.variance
            );
        }
    }
}

/// Re-solving the update with fresh samples drawn at the optimized scales
/// moves each scale by less than five standard errors of the weighted mean.
#[test]
fn ce_update_fixed_point() {
    let scenario = runner::preset("exp-ln-l2").unwrap().scenario;
    let gamma0 = threshold_linear(-10.0, 10.0);
    let nu = optimize(&scenario, gamma0, 9300);

    let n = 20_000usize;
    let mut rng = RngStream::new(9301, 0);
    let mut samples = Vec::with_capacity(n);
    let mut log_weights = Vec::with_capacity(n);
    for _ in 0..n {
        let x = sample_biased(&nu, &mut rng);
        log_weights.push(log_likelihood_ratio(&x, &scenario.branches, &nu).unwrap());
        samples.push(x);
    }
    let refit = ce_update(&samples, &log_weights, gamma0).unwrap();

    // delta-method standard error of the self-normalized weighted mean
    let hits: Vec<usize> = (0..n)
        .filter(|&i| samples[i].iter().sum::<f64>() <= gamma0)
        .collect();
    let max_lw = hits
        .iter()
        .map(|&i| log_weights[i])
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = hits
        .iter()
        .map(|&i| (log_weights[i] - max_lw).exp())
        .collect();
    let w_sum: f64 = weights.iter().sum();
    for l in 0..scenario.num_branches() {
        let mean = refit[l];
        let var_num: f64 = hits
            .iter()
            .zip(&weights)
            .map(|(&i, &w)| (w * (samples[i][l] - mean)).powi(2))
            .sum();
        let se = var_num.sqrt() / w_sum;
        assert!(
            (refit[l] - nu.nu()[l]).abs() < 5.0 * se,
            "branch {l}: refit {} vs optimized {} (se {se})",
            refit[l],
            nu.nu()[l]
        );
    }
}

/// Production runs sized at twice the published run counts achieve the 5%
/// relative-error target on every exponential-lognormal scenario.
#[test]
fn downstream_relative_error_meets_the_target() {
    for (preset, n) in [("exp-ln-l2", 3_200u64), ("exp-ln-l4", 5_400u64)] {
        let scenario = runner::preset(preset).unwrap().scenario;
        for (i, &gamma_th_db) in [-10.0, 0.0, 5.0].iter().enumerate() {
            let gamma0 = threshold_linear(gamma_th_db, scenario.snr_per_symbol_db);
            let nu = optimize(&scenario, gamma0, derive_seed(9400, 3, i as u64));
            let r = is_estimate(&scenario, gamma0, &nu, n, derive_seed(9400, 4, i as u64)).unwrap();
            assert!(
                r.relative_error < 0.05,
                "{preset} at {gamma_th_db} dB: relative error {:.3}% at n = {n}",
                100.0 * r.relative_error
            );
        }
    }
}

/// Four-branch tails have no quadrature oracle; the all-exponential closed
/// form and naive/IS cross-agreement validate them instead.
#[test]
fn l4_pure_exponential_matches_the_closed_form() {
    let lambdas = [0.5389, 0.9786, 0.4854, 0.224];
    let scenario = Scenario {
        branches: lambdas
            .iter()
            .map(
                |&lambda| outage_sim::distributions::BranchParams::ExpLogNormal {
                    omega: 1.0,
                    lambda,
                    mu: 0.0,
                    sigma: 1.0,
                },
            )
            .collect(),
        snr_per_symbol_db: 10.0,
        thresholds_db: vec![],
    };
    let gamma0 = 0.01;
    let truth = outage_sim::oracle::hypoexponential_cdf(&lambdas, gamma0).unwrap();
    let nu = optimize(&scenario, gamma0, 9600);
    let r = is_estimate(&scenario, gamma0, &nu, 20_000, 9601).unwrap();
    let se = (r.variance / r.n as f64).sqrt();
    assert!(
        (r.p_hat - truth).abs() <= 3.0 * se,
        "p_hat {} vs hypoexponential {truth} (se {se})",
        r.p_hat
    );
}

#[test]
fn l4_is_agrees_with_naive_where_naive_is_feasible() {
    let scenario = runner::preset("exp-ln-l4").unwrap().scenario;
    let gamma0 = threshold_linear(5.0, 10.0);
    let nu = optimize(&scenario, gamma0, 9700);
    let is = is_estimate(&scenario, gamma0, &nu, 10_000, 9701).unwrap();
    let naive = outage_sim::estimators::naive_mc(&scenario, gamma0, 10_000_000, 9702).unwrap();
    assert!(naive.hit_count > 20, "naive baseline too sparse to compare");
    let half_is = 1.96 * (is.variance / is.n as f64).sqrt();
    let half_naive = 1.96 * (naive.variance / naive.n as f64).sqrt();
    assert!(
        (is.p_hat - naive.p_hat).abs() <= half_is + half_naive,
        "IS {} vs naive {} beyond combined intervals",
        is.p_hat,
        naive.p_hat
    );
}

/// The adaptive level of a pilot stage estimates the rho-quantile of the sum
/// under the current scales.
#[test]
fn adaptive_level_tracks_the_sum_quantile() {
    let nu = BiasedParams::new(vec![0.5, 0.25]).unwrap();
    let mut rng = RngStream::new(9500, 0);
    let sums: Vec<f64> = (0..50_000)
        .map(|_| sample_biased(&nu, &mut rng).iter().sum())
        .collect();
    let level = adaptive_level(&sums, 0.01).unwrap();
    // 1% quantile of the hypoexponential sum, from the closed-form CDF
    let truth = {
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if outage_sim::oracle::hypoexponential_cdf(&[0.5, 0.25], mid).unwrap() < 0.01 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    assert!(
        (level / truth - 1.0).abs() < 0.1,
        "level {level} vs quantile {truth}"
    );
}
