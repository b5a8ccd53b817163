#ifndef OUTAGE_SIM_H
#define OUTAGE_SIM_H

/* Generated by cbindgen from outage-sim-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call in this interface.
 */
typedef enum OsimStatus {
  OSIM_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  OSIM_STATUS_NULL_POINTER = 1,
  /**
   * An argument lay outside its mathematical or configured domain.
   */
  OSIM_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A string argument was not valid UTF-8.
   */
  OSIM_STATUS_INVALID_UTF8 = 3,
  /**
   * The preset name is not one of the compiled-in scenarios.
   */
  OSIM_STATUS_UNKNOWN_PRESET = 4,
  /**
   * No sample reached the target region; the estimate is uninformative.
   */
  OSIM_STATUS_DEGENERATE_ESTIMATE = 5,
  /**
   * The optimizer hit its iteration cap before reaching the target level.
   */
  OSIM_STATUS_NO_CONVERGENCE = 6,
  /**
   * Paired array arguments have inconsistent lengths.
   */
  OSIM_STATUS_LENGTH_MISMATCH = 7,
} OsimStatus;

/**
 * Opaque receiver configuration: branch distributions plus the per-symbol
 * SNR they are swept against.
 */
typedef struct OsimScenario OsimScenario;

/**
 * Opaque incremental constructor for custom scenarios.
 */
typedef struct OsimScenarioBuilder OsimScenarioBuilder;

/**
 * One estimator outcome.
 */
typedef struct OsimEstimate {
  /**
   * Estimated probability.
   */
  double p_hat;
  /**
   * Sample mean of the squared per-sample term.
   */
  double second_moment;
  /**
   * Unbiased sample variance of the per-sample term.
   */
  double variance;
  /**
   * 1.96 * sqrt(variance / n) / p_hat; +inf when p_hat is 0.
   */
  double relative_error;
  /**
   * Samples used.
   */
  uint64_t n;
  /**
   * Samples that landed at or below the threshold.
   */
  uint64_t hit_count;
  /**
   * Master seed of the run.
   */
  uint64_t seed;
} OsimEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a scenario from a compiled-in preset: "exp-ln-l2", "exp-ln-l4",
 * "exp-gg-l2", or "exp-gg-l4".
 *
 * # Safety
 * `name` must point to a NUL-terminated string and `out` must be a valid
 * writable pointer. On success the caller owns the handle and must release
 * it with [`osim_scenario_free`].
 */
enum OsimStatus osim_scenario_preset(const char *name, struct OsimScenario **out);

/**
 * Releases a scenario handle; null is ignored.
 *
 * # Safety
 * `scenario` must be a handle returned by this library and not yet freed.
 */
void osim_scenario_free(struct OsimScenario *scenario);

/**
 * Number of diversity branches in the scenario; 0 for a null handle.
 *
 * # Safety
 * `scenario` must be a live handle returned by this library, or null.
 */
size_t osim_scenario_branch_count(const struct OsimScenario *scenario);

/**
 * Starts building a custom scenario.
 */
struct OsimScenarioBuilder *osim_scenario_builder_new(double snr_per_symbol_db);

/**
 * Appends an exponential-lognormal branch.
 *
 * # Safety
 * `builder` must be a live builder handle.
 */
enum OsimStatus osim_scenario_builder_add_exp_lognormal(struct OsimScenarioBuilder *builder,
                                                        double omega,
                                                        double lambda,
                                                        double mu,
                                                        double sigma);

/**
 * Appends an exponential-generalized-Gamma branch.
 *
 * # Safety
 * `builder` must be a live builder handle.
 */
enum OsimStatus osim_scenario_builder_add_exp_gen_gamma(struct OsimScenarioBuilder *builder,
                                                        double omega,
                                                        double lambda,
                                                        double alpha,
                                                        double beta,
                                                        double gg_scale);

/**
 * Finishes the builder into a scenario handle. The builder is consumed and
 * must not be used or freed afterwards, whether or not the call succeeds.
 *
 * # Safety
 * `builder` must be a live builder handle and `out` a valid writable
 * pointer.
 */
enum OsimStatus osim_scenario_builder_build(struct OsimScenarioBuilder *builder,
                                            struct OsimScenario **out);

/**
 * Releases an unfinished builder; null is ignored.
 *
 * # Safety
 * `builder` must be a live builder handle not yet consumed by
 * [`osim_scenario_builder_build`], or null.
 */
void osim_scenario_builder_free(struct OsimScenarioBuilder *builder);

/**
 * Converts a threshold and per-symbol SNR, both in dB, to the linear sum
 * threshold.
 */
double osim_threshold_linear(double gamma_th_db, double snr_per_symbol_db);

/**
 * Optimizes the biased exponential scales for the target threshold with
 * the multilevel cross-entropy iteration. `nu_out` must hold one slot per
 * branch; `iterations_out` (optional) receives the iteration count.
 *
 * # Safety
 * `scenario` must be a live handle; `nu_out` must point to `nu_len`
 * writable doubles; `iterations_out` may be null.
 */
enum OsimStatus osim_ce_optimize(const struct OsimScenario *scenario,
                                 double gamma0,
                                 double rho,
                                 uint64_t n_pilot,
                                 uint32_t max_iter,
                                 uint64_t seed,
                                 double *nu_out,
                                 size_t nu_len,
                                 uint32_t *iterations_out);

/**
 * Importance-sampling estimate of `P(S_L <= gamma0)` at the given biased
 * scales.
 *
 * # Safety
 * `scenario` must be a live handle; `nu` must point to `nu_len` readable
 * doubles; `out` must be a valid writable pointer.
 */
enum OsimStatus osim_is_estimate(const struct OsimScenario *scenario,
                                 double gamma0,
                                 const double *nu,
                                 size_t nu_len,
                                 uint64_t n,
                                 uint64_t seed,
                                 struct OsimEstimate *out);

/**
 * Naive Monte Carlo estimate of `P(S_L <= gamma0)`. A zero-hit run
 * succeeds with `p_hat` 0 and an infinite relative error.
 *
 * # Safety
 * `scenario` must be a live handle and `out` a valid writable pointer.
 */
enum OsimStatus osim_naive_mc(const struct OsimScenario *scenario,
                              double gamma0,
                              uint64_t n,
                              uint64_t seed,
                              struct OsimEstimate *out);

/**
 * Samples naive Monte Carlo needs for relative accuracy `eps0` at
 * confidence constant `c`.
 *
 * # Safety
 * `out` must be a valid writable pointer.
 */
enum OsimStatus osim_runs_naive(double p, double eps0, double c, double *out);

/**
 * Samples importance sampling needs for the same accuracy, given the
 * per-sample variance of the weighted indicator.
 *
 * # Safety
 * `out` must be a valid writable pointer.
 */
enum OsimStatus osim_runs_is(double variance, double p, double eps0, double c, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OUTAGE_SIM_H */
