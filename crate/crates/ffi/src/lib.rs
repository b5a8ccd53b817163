//! C ABI for the outage-sim estimators.
//!
//! Scenarios are opaque handles created from a named preset or assembled
//! branch by branch with a builder. Every fallible call returns an
//! [`OsimStatus`] and writes its result through out-pointers; functions
//! never panic across the boundary for any argument combination, null
//! included. Handles must be released with their matching `_free` function.

use std::ffi::{c_char, CStr};

use outage_sim::ce::{ce_optimize, CEConfig};
use outage_sim::distributions::{BiasedParams, BranchParams};
use outage_sim::efficiency;
use outage_sim::estimators::{is_estimate, naive_mc, EstimateResult, Scenario};
use outage_sim::runner;
use outage_sim::Error;

/// Result of every fallible call in this interface.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OsimStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument lay outside its mathematical or configured domain.
    InvalidArgument = 2,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 3,
    /// The preset name is not one of the compiled-in scenarios.
    UnknownPreset = 4,
    /// No sample reached the target region; the estimate is uninformative.
    DegenerateEstimate = 5,
    /// The optimizer hit its iteration cap before reaching the target level.
    NoConvergence = 6,
    /// Paired array arguments have inconsistent lengths.
    LengthMismatch = 7,
}

fn status_of(e: &Error) -> OsimStatus {
    match e {
        Error::Domain(_) | Error::Validation(_) => OsimStatus::InvalidArgument,
        Error::LengthMismatch { .. } => OsimStatus::LengthMismatch,
        Error::DegenerateEstimate { .. } | Error::DegenerateUpdate { .. } => {
            OsimStatus::DegenerateEstimate
        }
        Error::NoConvergence { .. } => OsimStatus::NoConvergence,
        _ => OsimStatus::InvalidArgument,
    }
}

/// Opaque receiver configuration: branch distributions plus the per-symbol
/// SNR they are swept against.
pub struct OsimScenario {
    inner: Scenario,
}

/// Opaque incremental constructor for custom scenarios.
pub struct OsimScenarioBuilder {
    snr_per_symbol_db: f64,
    branches: Vec<BranchParams>,
}

/// One estimator outcome.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct OsimEstimate {
    /// Estimated probability.
    pub p_hat: f64,
    /// Sample mean of the squared per-sample term.
    pub second_moment: f64,
    /// Unbiased sample variance of the per-sample term.
    pub variance: f64,
    /// 1.96 * sqrt(variance / n) / p_hat; +inf when p_hat is 0.
    pub relative_error: f64,
    /// Samples used.
    pub n: u64,
    /// Samples that landed at or below the threshold.
    pub hit_count: u64,
    /// Master seed of the run.
    pub seed: u64,
}

impl From<EstimateResult> for OsimEstimate {
    fn from(r: EstimateResult) -> Self {
        OsimEstimate {
            p_hat: r.p_hat,
            second_moment: r.second_moment,
            variance: r.variance,
            relative_error: r.relative_error,
            n: r.n,
            hit_count: r.hit_count,
            seed: r.seed,
        }
    }
}

/// Creates a scenario from a compiled-in preset: "exp-ln-l2", "exp-ln-l4",
/// "exp-gg-l2", or "exp-gg-l4".
///
/// # Safety
/// `name` must point to a NUL-terminated string and `out` must be a valid
/// writable pointer. On success the caller owns the handle and must release
/// it with [`osim_scenario_free`].
#[no_mangle]
pub unsafe extern "C" fn osim_scenario_preset(
    name: *const c_char,
    out: *mut *mut OsimScenario,
) -> OsimStatus {
    if name.is_null() || out.is_null() {
        return OsimStatus::NullPointer;
    }
    let name = match CStr::from_ptr(name).to_str() {
        Ok(s) => s,
        Err(_) => return OsimStatus::InvalidUtf8,
    };
    match runner::preset(name) {
        Ok(cfg) => {
            let handle = Box::new(OsimScenario {
                inner: cfg.scenario,
            });
            *out = Box::into_raw(handle);
            OsimStatus::Ok
        }
        Err(_) => OsimStatus::UnknownPreset,
    }
}

/// Releases a scenario handle; null is ignored.
///
/// # Safety
/// `scenario` must be a handle returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn osim_scenario_free(scenario: *mut OsimScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Number of diversity branches in the scenario; 0 for a null handle.
///
/// # Safety
/// `scenario` must be a live handle returned by this library, or null.
#[no_mangle]
pub unsafe extern "C" fn osim_scenario_branch_count(scenario: *const OsimScenario) -> usize {
    if scenario.is_null() {
        return 0;
    }
    (*scenario).inner.num_branches()
}

/// Starts building a custom scenario.
#[no_mangle]
pub extern "C" fn osim_scenario_builder_new(snr_per_symbol_db: f64) -> *mut OsimScenarioBuilder {
    Box::into_raw(Box::new(OsimScenarioBuilder {
        snr_per_symbol_db,
        branches: Vec::new(),
    }))
}

/// Appends an exponential-lognormal branch.
///
/// # Safety
/// `builder` must be a live builder handle.
#[no_mangle]
pub unsafe extern "C" fn osim_scenario_builder_add_exp_lognormal(
    builder: *mut OsimScenarioBuilder,
    omega: f64,
    lambda: f64,
    mu: f64,
    sigma: f64,
) -> OsimStatus {
    if builder.is_null() {
        return OsimStatus::NullPointer;
    }
    let branch = BranchParams::ExpLogNormal {
        omega,
        lambda,
        mu,
        sigma,
    };
    match branch.validate() {
        Ok(()) => {
            (*builder).branches.push(branch);
            OsimStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Appends an exponential-generalized-Gamma branch.
///
/// # Safety
/// `builder` must be a live builder handle.
#[no_mangle]
pub unsafe extern "C" fn osim_scenario_builder_add_exp_gen_gamma(
    builder: *mut OsimScenarioBuilder,
    omega: f64,
    lambda: f64,
    alpha: f64,
    beta: f64,
    gg_scale: f64,
) -> OsimStatus {
    if builder.is_null() {
        return OsimStatus::NullPointer;
    }
    let branch = BranchParams::ExpGenGamma {
        omega,
        lambda,
        alpha,
        beta,
        gg_scale,
    };
    match branch.validate() {
        Ok(()) => {
            (*builder).branches.push(branch);
            OsimStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Finishes the builder into a scenario handle. The builder is consumed and
/// must not be used or freed afterwards, whether or not the call succeeds.
///
/// # Safety
/// `builder` must be a live builder handle and `out` a valid writable
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn osim_scenario_builder_build(
    builder: *mut OsimScenarioBuilder,
    out: *mut *mut OsimScenario,
) -> OsimStatus {
    if builder.is_null() || out.is_null() {
        return OsimStatus::NullPointer;
    }
    let builder = Box::from_raw(builder);
    let scenario = Scenario {
        branches: builder.branches,
        snr_per_symbol_db: builder.snr_per_symbol_db,
        thresholds_db: Vec::new(),
    };
    match scenario.validate() {
        Ok(()) => {
            *out = Box::into_raw(Box::new(OsimScenario { inner: scenario }));
            OsimStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Releases an unfinished builder; null is ignored.
///
/// # Safety
/// `builder` must be a live builder handle not yet consumed by
/// [`osim_scenario_builder_build`], or null.
#[no_mangle]
pub unsafe extern "C" fn osim_scenario_builder_free(builder: *mut OsimScenarioBuilder) {
    if !builder.is_null() {
        drop(Box::from_raw(builder));
    }
}

/// Converts a threshold and per-symbol SNR, both in dB, to the linear sum
/// threshold.
#[no_mangle]
pub extern "C" fn osim_threshold_linear(gamma_th_db: f64, snr_per_symbol_db: f64) -> f64 {
    outage_sim::distributions::threshold_linear(gamma_th_db, snr_per_symbol_db)
}

/// Optimizes the biased exponential scales for the target threshold with
/// the multilevel cross-entropy iteration. `nu_out` must hold one slot per
/// branch; `iterations_out` (optional) receives the iteration count.
///
/// # Safety
/// `scenario` must be a live handle; `nu_out` must point to `nu_len`
/// writable doubles; `iterations_out` may be null.
#[no_mangle]
pub unsafe extern "C" fn osim_ce_optimize(
    scenario: *const OsimScenario,
    gamma0: f64,
    rho: f64,
    n_pilot: u64,
    max_iter: u32,
    seed: u64,
    nu_out: *mut f64,
    nu_len: usize,
    iterations_out: *mut u32,
) -> OsimStatus {
    if scenario.is_null() || nu_out.is_null() {
        return OsimStatus::NullPointer;
    }
    let scenario = &(*scenario).inner;
    if nu_len != scenario.num_branches() {
        return OsimStatus::LengthMismatch;
    }
    let cfg = CEConfig {
        rho,
        n_pilot,
        max_iter: max_iter as usize,
        seed,
    };
    match ce_optimize(scenario, gamma0, &cfg) {
        Ok((nu, trace)) => {
            let out = std::slice::from_raw_parts_mut(nu_out, nu_len);
            out.copy_from_slice(nu.nu());
            if !iterations_out.is_null() {
                *iterations_out = trace.iterations.len() as u32;
            }
            OsimStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Importance-sampling estimate of `P(S_L <= gamma0)` at the given biased
/// scales.
///
/// # Safety
/// `scenario` must be a live handle; `nu` must point to `nu_len` readable
/// doubles; `out` must be a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn osim_is_estimate(
    scenario: *const OsimScenario,
    gamma0: f64,
    nu: *const f64,
    nu_len: usize,
    n: u64,
    seed: u64,
    out: *mut OsimEstimate,
) -> OsimStatus {
    if scenario.is_null() || nu.is_null() || out.is_null() {
        return OsimStatus::NullPointer;
    }
    let scenario = &(*scenario).inner;
    let nu = std::slice::from_raw_parts(nu, nu_len);
    let nu = match BiasedParams::new(nu.to_vec()) {
        Ok(v) => v,
        Err(e) => return status_of(&e),
    };
    match is_estimate(scenario, gamma0, &nu, n, seed) {
        Ok(r) => {
            *out = r.into();
            OsimStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Naive Monte Carlo estimate of `P(S_L <= gamma0)`. A zero-hit run
/// succeeds with `p_hat` 0 and an infinite relative error.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn osim_naive_mc(
    scenario: *const OsimScenario,
    gamma0: f64,
    n: u64,
    seed: u64,
    out: *mut OsimEstimate,
) -> OsimStatus {
    if scenario.is_null() || out.is_null() {
        return OsimStatus::NullPointer;
    }
    match naive_mc(&(*scenario).inner, gamma0, n, seed) {
        Ok(r) => {
            *out = r.into();
            OsimStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Samples naive Monte Carlo needs for relative accuracy `eps0` at
/// confidence constant `c`.
///
/// # Safety
/// `out` must be a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn osim_runs_naive(p: f64, eps0: f64, c: f64, out: *mut f64) -> OsimStatus {
    if out.is_null() {
        return OsimStatus::NullPointer;
    }
    match efficiency::runs_naive(p, eps0, c) {
        Ok(v) => {
            *out = v;
            OsimStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Samples importance sampling needs for the same accuracy, given the
/// per-sample variance of the weighted indicator.
///
/// # Safety
/// `out` must be a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn osim_runs_is(
    variance: f64,
    p: f64,
    eps0: f64,
    c: f64,
    out: *mut f64,
) -> OsimStatus {
    if out.is_null() {
        return OsimStatus::NullPointer;
    }
    match efficiency::runs_is(variance, p, eps0, c) {
        Ok(v) => {
            *out = v;
            OsimStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}
