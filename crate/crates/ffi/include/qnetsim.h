#ifndef QNETSIM_H
#define QNETSIM_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Network layer selector.
 */
typedef enum QnLayer {
  QN_LAYER_FIBER = 0,
  QN_LAYER_PHOTONIC = 1,
} QnLayer;

/**
 * Result code of every fallible call.
 */
typedef enum QnStatus {
  QN_STATUS_OK = 0,
  QN_STATUS_NULL_POINTER = 1,
  QN_STATUS_INVALID_PARAMETER = 2,
  QN_STATUS_INSUFFICIENT_DATA = 3,
  QN_STATUS_OUT_OF_RANGE = 4,
  QN_STATUS_BUFFER_TOO_SMALL = 5,
  QN_STATUS_IO = 6,
  QN_STATUS_INTERNAL = 7,
  QN_STATUS_PANIC = 8,
} QnStatus;

/**
 * Aggregate statistics of an ensemble of realizations.
 */
typedef struct QnEnsemble QnEnsemble;

/**
 * Model parameters.
 */
typedef struct QnParams QnParams;

/**
 * One sampled network: node positions plus fiber and photonic layers.
 */
typedef struct QnRealization QnRealization;

/**
 * Observables of one layer of a realization.
 */
typedef struct QnGraphStats {
  size_t n_nodes;
  size_t n_edges;
  size_t s1;
  size_t s2;
  double giant_fraction;
  double mean_degree;
  double avg_clustering;
} QnGraphStats;

/**
 * Scalar ensemble statistics. Quantities that could not be computed are NaN.
 */
typedef struct QnEnsembleSummary {
  size_t n_nodes;
  size_t n_realizations;
  double rho;
  double radius_km;
  double m;
  double m_stderr;
  double chi;
  double binder;
  double s2_over_s1;
  double mean_degree;
  double avg_clustering;
  double avg_path;
  double s_star;
} QnEnsembleSummary;

/**
 * Least-squares line through (ln x, ln y).
 */
typedef struct QnPowerLawFit {
  double exponent;
  double prefactor_log;
  double residual;
  double exponent_stderr;
  size_t n_points;
} QnPowerLawFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Length in bytes of the last error message of this thread, excluding the
 * terminating NUL; 0 when the last call succeeded.
 */
size_t qn_last_error_length(void);

/**
 * Copies the last error message of this thread into `buf` as a
 * NUL-terminated string. Fails with `BUFFER_TOO_SMALL` when `len` cannot
 * hold the message and its terminator.
 */
enum QnStatus qn_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qn_version(void);

/**
 * Parameters with the library defaults (R = 1800 km, N = 1000, αL = 226 km,
 * β = 1, γ = 0.2 dB/km, n_p = 1000).
 */
struct QnParams *qn_params_new(void);

void qn_params_free(struct QnParams *params);

enum QnStatus qn_params_set_radius_km(struct QnParams *params, double radius_km);

enum QnStatus qn_params_set_n_nodes(struct QnParams *params, size_t n_nodes);

/**
 * Sets β and αL of the fiber law. An infinite scale disables distance decay.
 */
enum QnStatus qn_params_set_waxman(struct QnParams *params, double beta, double scale_km);

enum QnStatus qn_params_set_loss_db_per_km(struct QnParams *params, double loss);

enum QnStatus qn_params_set_n_pulses(struct QnParams *params, uint32_t n_pulses);

enum QnStatus qn_params_set_cutoff_epsilon(struct QnParams *params, double epsilon);

/**
 * Non-zero draws photonic links on all pairs instead of over fibers only.
 */
enum QnStatus qn_params_set_photonic_on_all_pairs(struct QnParams *params, bool all_pairs);

/**
 * Keeps N and rescales R so that N / (πR²) equals `rho`.
 */
enum QnStatus qn_params_set_density(struct QnParams *params, double rho);

enum QnStatus qn_params_density(const struct QnParams *params, double *out);

/**
 * Fiber probability Π(d) = β·exp(−d/αL).
 */
enum QnStatus qn_fiber_link_prob(const struct QnParams *params, double d_km, double *out);

/**
 * Transmissivity 10^(−γd/10).
 */
enum QnStatus qn_transmissivity(double d_km, double loss_db_per_km, double *out);

/**
 * Probability that at least one of `n_pulses` photons survives.
 */
enum QnStatus qn_photonic_link_prob(double p, uint32_t n_pulses, double *out);

/**
 * Probability of a photonic edge at distance `d_km` under `params`.
 */
enum QnStatus qn_combined_link_prob(const struct QnParams *params, double d_km, double *out);

/**
 * Samples realization `index` of the ensemble seeded by `base_seed`.
 */
enum QnStatus qn_realization_generate(const struct QnParams *params,
                                      uint64_t base_seed,
                                      uint64_t index,
                                      struct QnRealization **out);

void qn_realization_free(struct QnRealization *r);

enum QnStatus qn_realization_node_count(const struct QnRealization *r, size_t *out);

/**
 * Position of node `i` in km, relative to the disk center.
 */
enum QnStatus qn_realization_node_position(const struct QnRealization *r,
                                           size_t i,
                                           double *x_km,
                                           double *y_km);

enum QnStatus qn_realization_edge_count(const struct QnRealization *r,
                                        enum QnLayer layer,
                                        size_t *out);

/**
 * Copies the edges of `layer` as `(i, j)` pairs with `i < j` into
 * `pairs`, which must hold `2 * capacity` integers. `written` receives the
 * number of edges copied. Fails with `BUFFER_TOO_SMALL` and copies nothing
 * when `capacity` is below the edge count.
 */
enum QnStatus qn_realization_edges(const struct QnRealization *r,
                                   enum QnLayer layer,
                                   uint32_t *pairs,
                                   size_t capacity,
                                   size_t *written);

enum QnStatus qn_realization_stats(const struct QnRealization *r,
                                   enum QnLayer layer,
                                   struct QnGraphStats *out);

/**
 * Runs realizations `0..n_realizations` with the given base seed.
 * Statistics are taken on the photonic layer.
 */
enum QnStatus qn_ensemble_run(const struct QnParams *params,
                              size_t n_realizations,
                              uint64_t base_seed,
                              bool measure_paths,
                              struct QnEnsemble **out);

void qn_ensemble_free(struct QnEnsemble *e);

enum QnStatus qn_ensemble_summary(const struct QnEnsemble *e, struct QnEnsembleSummary *out);

/**
 * Copies the mean degree distribution into `k` / `p_k` (each `capacity`
 * long). `written` receives the number of entries, also on
 * `BUFFER_TOO_SMALL`, so a first call with `capacity = 0` sizes the buffers.
 */
enum QnStatus qn_ensemble_degree_distribution(const struct QnEnsemble *e,
                                              size_t *k,
                                              double *p_k,
                                              size_t capacity,
                                              size_t *written);

/**
 * Fits y = e^c·x^k to `n` strictly positive points.
 */
enum QnStatus qn_fit_power_law(const double *xs,
                               const double *ys,
                               size_t n,
                               struct QnPowerLawFit *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QNETSIM_H */
