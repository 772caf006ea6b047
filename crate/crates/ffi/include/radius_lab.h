#ifndef RADIUS_LAB_H
#define RADIUS_LAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RlStatus {
  RL_STATUS_OK = 0,
  RL_STATUS_NULL_POINTER = 1,
  RL_STATUS_INVALID_ARGUMENT = 2,
  RL_STATUS_DIMENSION_MISMATCH = 3,
  RL_STATUS_UNSUPPORTED = 4,
  RL_STATUS_NOT_ON_GRID = 5,
  RL_STATUS_MISALIGNED_WINDOW = 6,
  RL_STATUS_SAMPLING_BUDGET = 7,
  RL_STATUS_EMPTY_FIBER = 8,
  RL_STATUS_INFEASIBLE = 9,
  RL_STATUS_CONFIG = 10,
  RL_STATUS_INVALID_UTF8 = 11,
  RL_STATUS_BUFFER_TOO_SMALL = 12,
  RL_STATUS_PANIC = 13,
} RlStatus;

/**
 * Result of a Chebyshev radius computation.
 */
typedef struct RlCertificate RlCertificate;

/**
 * A normed space.
 */
typedef struct RlSpace RlSpace;

/**
 * Grid and sampling settings for the Brownian-path experiments.
 */
typedef struct RlWienerConfig RlWienerConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call into this library on the same thread.
 */
const char *rl_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rl_version(void);

/**
 * Parses a space label such as `lp:p=4,dim=2` or `sup_plus_point:t=0.5`.
 *
 * # Safety
 * `label` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RlStatus rl_space_parse(const char *label, struct RlSpace **out_space);

/**
 * # Safety
 * `space` must come from `rl_space_parse` and not be used afterwards.
 */
void rl_space_free(struct RlSpace *space);

/**
 * Norm of the vector `x[0..len]`.
 *
 * # Safety
 * `x` must point to `len` doubles; `space` and `out` must be valid.
 */
enum RlStatus rl_space_eval_norm(const struct RlSpace *space,
                                 const double *x,
                                 size_t len,
                                 double *out_norm);

/**
 * Numeric modulus of convexity at `epsilon` (spaces of dimension 2 or 3).
 *
 * # Safety
 * `space` and `out` must be valid.
 */
enum RlStatus rl_space_modulus(const struct RlSpace *space,
                               double epsilon,
                               double tol,
                               double *out_modulus);

/**
 * Chebyshev radius and center of `n_points` points of dimension `dim`,
 * stored row-major in `points`.
 *
 * # Safety
 * `points` must hold `n_points * dim` doubles; other pointers must be valid.
 */
enum RlStatus rl_radius_center(const struct RlSpace *space,
                               const double *points,
                               size_t n_points,
                               size_t dim,
                               double tol,
                               size_t max_iters,
                               struct RlCertificate **out_cert);

/**
 * # Safety
 * `cert` must come from `rl_radius_center` and not be used afterwards.
 */
void rl_certificate_free(struct RlCertificate *cert);

/**
 * Reported radius (the attained max distance from the center); NaN for a null handle.
 *
 * # Safety
 * `cert` must be null or valid.
 */
double rl_certificate_radius(const struct RlCertificate *cert);

/**
 * Certified lower bound on the radius; NaN for a null handle.
 *
 * # Safety
 * `cert` must be null or valid.
 */
double rl_certificate_lower(const struct RlCertificate *cert);

/**
 * `upper - lower`; NaN for a null handle.
 *
 * # Safety
 * `cert` must be null or valid.
 */
double rl_certificate_gap(const struct RlCertificate *cert);

/**
 * 1 if the gap met the tolerance, 0 otherwise (or for a null handle).
 *
 * # Safety
 * `cert` must be null or valid.
 */
int32_t rl_certificate_converged(const struct RlCertificate *cert);

/**
 * Dimension of the center; 0 for a null handle.
 *
 * # Safety
 * `cert` must be null or valid.
 */
size_t rl_certificate_dim(const struct RlCertificate *cert);

/**
 * Copies the center into `buf[0..len]`; `len` must be at least the dimension.
 *
 * # Safety
 * `buf` must have room for `len` doubles.
 */
enum RlStatus rl_certificate_center(const struct RlCertificate *cert, double *buf, size_t len);

/**
 * Grid with `intervals` cells (a power of two, at least 8), `n_samples`
 * conditioned paths and a seed.
 *
 * # Safety
 * `out` must be valid.
 */
enum RlStatus rl_wiener_config_new(size_t intervals,
                                   size_t n_samples,
                                   uint64_t seed,
                                   struct RlWienerConfig **out_cfg);

/**
 * # Safety
 * `cfg` must come from `rl_wiener_config_new` and not be used afterwards.
 */
void rl_wiener_config_free(struct RlWienerConfig *cfg);

/**
 * Worst-case fiber radius over the observations `ys[0..n]`.
 *
 * # Safety
 * `ys` must hold `n` doubles; other pointers must be valid.
 */
enum RlStatus rl_wiener_worst_radius(const struct RlWienerConfig *cfg,
                                     const double *ys,
                                     size_t n,
                                     double tol,
                                     double *out_radius);

/**
 * Estimated measure of paths outside the window set for `m`, with its 95% interval.
 *
 * # Safety
 * Output pointers must be valid.
 */
enum RlStatus rl_wiener_delta_hat(const struct RlWienerConfig *cfg,
                                  size_t m,
                                  double *out_delta,
                                  double *out_ci_lo,
                                  double *out_ci_hi);

/**
 * Probabilistic radius bound at level `delta`: the smallest certified
 * window among `ms[0..n_ms]` and the worst fiber radius on it.
 *
 * # Safety
 * Arrays must hold the stated counts; output pointers must be valid.
 */
enum RlStatus rl_wiener_prob_radius(const struct RlWienerConfig *cfg,
                                    double delta,
                                    const size_t *ms,
                                    size_t n_ms,
                                    const double *ys,
                                    size_t n_ys,
                                    double tol,
                                    size_t *out_m,
                                    double *out_bound);

/**
 * Runs an experiment from a JSON config. On success `*out_json` holds the
 * result document (release it with `rl_string_free`) and `*out_passed` is 1
 * iff every pass flag holds.
 *
 * # Safety
 * `config_json` must be NUL-terminated; output pointers must be valid.
 */
enum RlStatus rl_run_experiment(const char *config_json, char **out_json, int32_t *out_passed);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void rl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RADIUS_LAB_H */
