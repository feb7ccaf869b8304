#ifndef RANDSET_H
#define RANDSET_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RandsetStatus {
  RANDSET_STATUS_OK = 0,
  RANDSET_STATUS_NULL_POINTER = 1,
  RANDSET_STATUS_INVALID_INPUT = 2,
  RANDSET_STATUS_DOMAIN = 3,
  RANDSET_STATUS_NUMERICAL = 4,
  RANDSET_STATUS_PANIC = 5,
} RandsetStatus;

/**
 * Opaque Karhunen-Loève basis of the exponential kernel.
 */
typedef struct RandsetKlBasis RandsetKlBasis;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into the library from the same thread.
 */
const char *randset_last_error_message(void);

/**
 * Standard normal quantile for `p` in (0, 1).
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum RandsetStatus randset_inverse_normal_cdf(double p, double *out);

/**
 * Standard normal distribution function.
 */
double randset_normal_cdf(double z);

/**
 * Eigenpairs of `exp(-|x-y|/ell)` on `[lo, hi]`, `terms` of each parity.
 *
 * # Safety
 * `out` must be valid for writes. The handle is released with [`randset_kl_basis_free`].
 */
enum RandsetStatus randset_kl_basis_new(double ell,
                                        double lo,
                                        double hi,
                                        size_t terms,
                                        struct RandsetKlBasis **out);

/**
 * # Safety
 * `basis` must come from [`randset_kl_basis_new`] and not be used afterwards. Null is ignored.
 */
void randset_kl_basis_free(struct RandsetKlBasis *basis);

/**
 * Number of cosine (and of sine) terms; 0 for a null handle.
 *
 * # Safety
 * `basis` must be null or a live handle.
 */
size_t randset_kl_basis_terms(const struct RandsetKlBasis *basis);

/**
 * Copies roots and eigenvalues of both families; each array holds `len >= terms` entries.
 * Any output pointer may be null to skip it.
 *
 * # Safety
 * `basis` must be a live handle; non-null outputs must be valid for `len` writes.
 */
enum RandsetStatus randset_kl_basis_eigenpairs(const struct RandsetKlBasis *basis,
                                               double *alpha,
                                               double *c,
                                               double *alpha_star,
                                               double *c_star,
                                               size_t len);

/**
 * Evaluates `sigma * sum sqrt(c_k) phi_k(x) xi_k` at `n` points. `xi` holds
 * `2 * terms` coefficients interleaved (cosine, sine) per index.
 *
 * # Safety
 * `basis` must be a live handle; `xi` valid for `xi_len` reads; `xs` and `out` valid for `n`.
 */
enum RandsetStatus randset_kl_field_evaluate(const struct RandsetKlBasis *basis,
                                             const double *xi,
                                             size_t xi_len,
                                             double sigma,
                                             const double *xs,
                                             size_t n,
                                             double *out);

/**
 * Focal interval of the imprecise Gaussian `N([mu_lo, mu_hi], [sigma_lo, sigma_hi]^2)` at `omega` in (0, 1).
 *
 * # Safety
 * `lo` and `hi` must be valid for writes.
 */
enum RandsetStatus randset_imprecise_gaussian_focal(double omega,
                                                    double mu_lo,
                                                    double mu_hi,
                                                    double sigma_lo,
                                                    double sigma_hi,
                                                    double *lo,
                                                    double *hi);

/**
 * Lower and upper distribution functions of `n` random intervals at `m` ascending thresholds.
 *
 * # Safety
 * `lower`, `upper` valid for `n` reads; `thresholds`, `f_lower`, `f_upper` valid for `m`.
 */
enum RandsetStatus randset_empirical_pbox(const double *lower,
                                          const double *upper,
                                          size_t n,
                                          const double *thresholds,
                                          size_t m,
                                          double *f_lower,
                                          double *f_upper);

/**
 * Aumann expectation `[mean(lower), mean(upper)]` of `n` random intervals.
 *
 * # Safety
 * `lower`, `upper` valid for `n` reads; `lo`, `hi` valid for writes.
 */
enum RandsetStatus randset_aumann_expectation(const double *lower,
                                              const double *upper,
                                              size_t n,
                                              double *lo,
                                              double *hi);

/**
 * Lower and upper probability of the closed event `[event_lo, event_hi]` under
 * `n` weighted focal intervals. Weights must be nonnegative and sum to one.
 *
 * # Safety
 * Focal arrays and `weights` valid for `n` reads; `lower_p`, `upper_p` valid for writes.
 */
enum RandsetStatus randset_finite_probabilities(const double *focal_lo,
                                                const double *focal_hi,
                                                const double *weights,
                                                size_t n,
                                                double event_lo,
                                                double event_hi,
                                                double *lower_p,
                                                double *upper_p);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RANDSET_H */
