#ifndef HERMITE_DECAY_H
#define HERMITE_DECAY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HdStatus {
  HD_STATUS_OK = 0,
  HD_STATUS_NULL_POINTER = 1,
  HD_STATUS_DOMAIN = 2,
  HD_STATUS_PRECONDITION = 3,
  HD_STATUS_INVALID_PARAMS = 4,
  HD_STATUS_BRACKET_FAILURE = 5,
  HD_STATUS_QUADRATURE = 6,
  HD_STATUS_OUT_OF_RANGE = 7,
  HD_STATUS_PANIC = 8,
  HD_STATUS_OTHER = 9,
} HdStatus;

typedef struct HdCoefficients HdCoefficients;

typedef struct HdSharpness HdSharpness;

typedef struct HdSumParams HdSumParams;

/**
 * `sign * e^{log_abs}`; zero has `sign == 0` and `log_abs == -inf`.
 */
typedef struct HdSignedLog {
  int32_t sign;
  double log_abs;
} HdSignedLog;

typedef struct HdNmax {
  double n_max;
  double n_max_asymptotic;
  double a_max;
  double peak_deviation;
  double lambda;
  double phi_max;
  uint64_t truncation_n;
  uint64_t iterations;
} HdNmax;

typedef struct HdSharpnessSummary {
  double ratio_min;
  double ratio_max;
  double slope;
  double window_ratio_min;
  uint64_t points;
} HdSharpnessSummary;

typedef struct HdVemuri {
  /**
   * `+inf` when the coefficients contradict the decay rate.
   */
  double constant;
  uint64_t retained;
  uint64_t refused;
} HdVemuri;

/**
 * `Phi_f(x, t) = (re + i im) e^{log_scale}`, plus the certified tail radius.
 */
typedef struct HdEvolution {
  double re;
  double im;
  double log_scale;
  double log_abs;
  double tail_radius;
} HdEvolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null after a success.
 * Valid until the next call on the same thread.
 */
const char *hd_last_error(void);

/**
 * Version of the underlying library as a static NUL-terminated string.
 */
const char *hd_version(void);

/**
 * Normalized Hermite function `h_n(x)` in signed-log form.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum HdStatus hd_hermite(uint64_t n, double x, struct HdSignedLog *out);

/**
 * `phi` with `x = sqrt(2(n+1)) cosh(phi)`; needs `x > sqrt(2(n+1))`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum HdStatus hd_phi(double n, double x, double *out);

/**
 * # Safety
 * `out` must be valid for writes. Release the handle with [`hd_sum_params_free`].
 */
enum HdStatus hd_sum_params_new(double kappa, double beta, double y, struct HdSumParams **out);

/**
 * # Safety
 * `params` must come from [`hd_sum_params_new`] and not be used afterwards.
 */
void hd_sum_params_free(struct HdSumParams *params);

/**
 * `S(x; kappa, beta, y)` by direct summation.
 *
 * # Safety
 * `params` must be a live handle and `out` valid for writes.
 */
enum HdStatus hd_sum(const struct HdSumParams *params, double x, struct HdSignedLog *out);

/**
 * Partial sum over `first <= n <= last`.
 *
 * # Safety
 * `params` must be a live handle and `out` valid for writes.
 */
enum HdStatus hd_sum_range(const struct HdSumParams *params,
                           double x,
                           uint64_t first,
                           uint64_t last,
                           struct HdSignedLog *out);

/**
 * Bound on the tail `sum_{n >= start_n}` of the absolute terms.
 *
 * # Safety
 * `params` must be a live handle and `out` valid for writes.
 */
enum HdStatus hd_tail_bound(const struct HdSumParams *params,
                            uint64_t start_n,
                            double x,
                            struct HdSignedLog *out);

/**
 * `x^{1/2 - 2 beta} e^{-kappa x^2 tanh(y) / 2}`.
 *
 * # Safety
 * `params` must be a live handle and `out` valid for writes.
 */
enum HdStatus hd_envelope(const struct HdSumParams *params, double x, struct HdSignedLog *out);

/**
 * Maximizer of the argument function at `(x, y)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum HdStatus hd_find_nmax(double x, double y, struct HdNmax *out);

/**
 * Sharpness sweep over `x_grid[0..len]`.
 *
 * # Safety
 * `params` must be a live handle, `x_grid` valid for `len` reads and `out`
 * valid for writes. Release the result with [`hd_sharpness_free`].
 */
enum HdStatus hd_sharpness_new(const struct HdSumParams *params,
                               const double *x_grid,
                               size_t len,
                               struct HdSharpness **out);

/**
 * # Safety
 * `cert` must be a live handle and `out` valid for writes.
 */
enum HdStatus hd_sharpness_summary(const struct HdSharpness *cert, struct HdSharpnessSummary *out);

/**
 * Copies up to `cap` ratios into `buf` (which may be null) and returns the
 * number of grid points, or 0 for a null handle.
 *
 * # Safety
 * `cert` must be a live handle or null; `buf` valid for `cap` writes.
 */
size_t hd_sharpness_ratios(const struct HdSharpness *cert, double *buf, size_t cap);

/**
 * # Safety
 * `cert` must come from [`hd_sharpness_new`] and not be used afterwards.
 */
void hd_sharpness_free(struct HdSharpness *cert);

/**
 * Expansion of `e^{-tanh(2 alpha) pi x^2}` in the rescaled Hermite basis.
 *
 * # Safety
 * `out` must be valid for writes. Release with [`hd_coefficients_free`].
 */
enum HdStatus hd_coefficients_gaussian(double alpha, size_t n_terms, struct HdCoefficients **out);

/**
 * Wraps caller-supplied exact coefficients.
 *
 * # Safety
 * `coeffs` must be valid for `len` reads and `out` valid for writes.
 */
enum HdStatus hd_coefficients_from_array(const double *coeffs,
                                         size_t len,
                                         struct HdCoefficients **out);

/**
 * Number of coefficients, or 0 for a null handle.
 *
 * # Safety
 * `coeffs` must be a live handle or null.
 */
size_t hd_coefficients_len(const struct HdCoefficients *coeffs);

/**
 * # Safety
 * `coeffs` must be a live handle and `out` valid for writes.
 */
enum HdStatus hd_coefficients_get(const struct HdCoefficients *coeffs, size_t n, double *out);

/**
 * Copies up to `cap` per-coefficient quadrature errors into `buf` and returns
 * the total count.
 *
 * # Safety
 * `coeffs` must be a live handle or null; `buf` valid for `cap` writes.
 */
size_t hd_coefficients_quad_error(const struct HdCoefficients *coeffs, double *buf, size_t cap);

/**
 * Smallest `C` with `|c_n| <= C e^{-alpha n} max(n,1)^{-1/4}` on the resolved prefix.
 *
 * # Safety
 * `coeffs` must be a live handle and `out` valid for writes.
 */
enum HdStatus hd_vemuri_check(const struct HdCoefficients *coeffs,
                              double alpha,
                              struct HdVemuri *out);

/**
 * New handle holding the certified prefix, with the decay bound as its tail.
 *
 * # Safety
 * `coeffs` must be a live handle and `out` valid for writes.
 */
enum HdStatus hd_coefficients_certify(const struct HdCoefficients *coeffs,
                                      double alpha,
                                      struct HdCoefficients **out);

/**
 * `Phi_f(x, t)` for the harmonic-oscillator evolution of the expansion.
 *
 * # Safety
 * `coeffs` must be a live handle and `out` valid for writes.
 */
enum HdStatus hd_evolve(const struct HdCoefficients *coeffs,
                        double x,
                        double t,
                        struct HdEvolution *out);

/**
 * # Safety
 * `coeffs` must come from this library and not be used afterwards.
 */
void hd_coefficients_free(struct HdCoefficients *coeffs);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HERMITE_DECAY_H */
