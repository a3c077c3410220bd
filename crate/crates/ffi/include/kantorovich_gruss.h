#ifndef KANTOROVICH_GRUSS_H
#define KANTOROVICH_GRUSS_H

/* Generated with cbindgen:0.27.0 */

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KgNormMode {
  KG_NORM_MODE_GRID_LOWER = 0,
  KG_NORM_MODE_ANALYTIC_UPPER = 1,
} KgNormMode;

typedef enum KgOmegaMode {
  KG_OMEGA_MODE_LOWER = 0,
  KG_OMEGA_MODE_UPPER = 1,
} KgOmegaMode;

typedef enum KgResidual {
  /**
   * `sup |n[K_n(fg) - K_n f K_n g] - x(1-x) f'g'|`
   */
  KG_RESIDUAL_GV = 0,
  /**
   * `sup |K_n(fg) - K_n f K_n g|`
   */
  KG_RESIDUAL_GRUSS = 1,
  /**
   * `sup |n F_n(x) - x(1-x)|`; the function arguments are ignored.
   */
  KG_RESIDUAL_NFN = 2,
} KgResidual;

/**
 * Result code of every fallible call.
 */
typedef enum KgStatus {
  KG_STATUS_OK = 0,
  KG_STATUS_NULL_POINTER = 1,
  KG_STATUS_INVALID_UTF8 = 2,
  KG_STATUS_UNKNOWN_FUNCTION = 3,
  KG_STATUS_OUT_OF_DOMAIN = 4,
  KG_STATUS_PAIR_TOO_CLOSE = 5,
  KG_STATUS_INDEX_OUT_OF_RANGE = 6,
  KG_STATUS_INVALID_ARGUMENT = 7,
  KG_STATUS_PANIC = 8,
} KgStatus;

/**
 * Grid, modulus and norm settings plus the cell quadrature rule.
 */
typedef struct KgEstimator KgEstimator;

/**
 * A corpus function, or a product of two.
 */
typedef struct KgFunction KgFunction;

/**
 * Records of a sweep, in `(x, y)` grid order.
 */
typedef struct KgReport KgReport;

/**
 * One inequality check.
 */
typedef struct KgRecord {
  size_t n;
  double x;
  double y;
  double lhs;
  double rhs;
  double slack;
  bool pass;
} KgRecord;

/**
 * Least-squares fit of `log v = intercept + slope log n`. When
 * `identically_zero` is true the other fields are zero.
 */
typedef struct KgRateFit {
  bool identically_zero;
  double slope;
  double intercept;
  double r_squared;
} KgRateFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Description of the last failure on this thread, or an empty string.
 */
const char *kg_last_error_message(void);

/**
 * Looks up a corpus function by name (`"exp"`, `"e_2"`, `"1/(1+x)"`, ...).
 */
enum KgStatus kg_function_new(const char *name, struct KgFunction **out);

/**
 * The pointwise product `f g`, with derivatives from the Leibniz rule.
 */
enum KgStatus kg_function_product(const struct KgFunction *f,
                                  const struct KgFunction *g,
                                  struct KgFunction **out);

void kg_function_free(struct KgFunction *f);

/**
 * Canonical name, owned by the handle.
 */
const char *kg_function_name(const struct KgFunction *f);

/**
 * Derivative of order 0 to 3 at `x`.
 */
enum KgStatus kg_function_eval(const struct KgFunction *f, uint32_t order, double x, double *out);

/**
 * Analytic upper bound on `sup |f^(order)|` over `[0, 1]`.
 */
enum KgStatus kg_function_norm_bound(const struct KgFunction *f, uint32_t order, double *out);

enum KgStatus kg_divided_difference(const struct KgFunction *f,
                                    double x,
                                    double y,
                                    double pair_floor,
                                    double *out);

/**
 * `C(n,k) x^k (1-x)^(n-k)`.
 */
enum KgStatus kg_bernstein_basis(size_t n, size_t k, double x, double *out);

/**
 * `K_n(f)(x)` with the default 8-point Gauss-Legendre cell rule.
 */
enum KgStatus kg_kantorovich_apply(const struct KgFunction *f, size_t n, double x, double *out);

/**
 * Closed-form `K_n(e_j)(x)` for `j` in 0..=2.
 */
enum KgStatus kg_moment_exact(uint32_t j, size_t n, double x, double *out);

/**
 * `F_n(x) = (x(1-x)(n-1) + 1/3) / (n+1)^2`.
 */
double kg_f_n(size_t n, double x);

/**
 * `E_n(x, y) = F_n(x) + (x-y)(1-2x) / (2(n+1))`.
 */
double kg_e_n(size_t n, double x, double y);

/**
 * Estimator with the given grid and estimate settings.
 */
enum KgStatus kg_estimator_new(size_t grid_points,
                               double pair_floor,
                               double tau_check,
                               enum KgOmegaMode omega_mode,
                               enum KgNormMode norm_mode,
                               struct KgEstimator **out);

/**
 * 33-point grid, pair floor 1e-3, tau 1e-9, lower moduli, grid norms.
 */
enum KgStatus kg_estimator_default(struct KgEstimator **out);

void kg_estimator_free(struct KgEstimator *est);

enum KgStatus kg_theorem_lhs(const struct KgEstimator *est,
                             const struct KgFunction *f,
                             const struct KgFunction *g,
                             size_t n,
                             double x,
                             double y,
                             double *out);

enum KgStatus kg_theorem_rhs(const struct KgEstimator *est,
                             const struct KgFunction *f,
                             const struct KgFunction *g,
                             size_t n,
                             double x,
                             double y,
                             double *out);

enum KgStatus kg_perturbed_lhs(const struct KgEstimator *est,
                               const struct KgFunction *f,
                               const struct KgFunction *g,
                               size_t n,
                               double x,
                               double y,
                               double *out);

enum KgStatus kg_perturbed_rhs(const struct KgEstimator *est,
                               const struct KgFunction *f,
                               const struct KgFunction *g,
                               size_t n,
                               double x,
                               double y,
                               double *out);

/**
 * Checks the two-point estimate on every admissible grid pair.
 */
enum KgStatus kg_check_theorem(const struct KgEstimator *est,
                               const struct KgFunction *f,
                               const struct KgFunction *g,
                               size_t n,
                               struct KgReport **out);

/**
 * Checks the perturbed Grüss estimate on every admissible grid pair.
 */
enum KgStatus kg_check_perturbed(const struct KgEstimator *est,
                                 const struct KgFunction *f,
                                 const struct KgFunction *g,
                                 size_t n,
                                 struct KgReport **out);

/**
 * Checks `|K_n h - h| <= ||h'||/(2n) + 8||h''||/(9n)` at every grid point.
 */
enum KgStatus kg_ah_bound_check(const struct KgEstimator *est,
                                const struct KgFunction *h,
                                size_t n,
                                struct KgReport **out);

void kg_report_free(struct KgReport *report);

/**
 * Number of records; 0 for NULL.
 */
size_t kg_report_len(const struct KgReport *report);

/**
 * Number of passing records; 0 for NULL.
 */
size_t kg_report_passes(const struct KgReport *report);

/**
 * Grid pairs left out because they were closer than the pair floor.
 */
size_t kg_report_skipped(const struct KgReport *report);

enum KgStatus kg_report_get(const struct KgReport *report, size_t index, struct KgRecord *out);

/**
 * Smallest `rhs - lhs`; fails with `InvalidArgument` on an empty report.
 */
enum KgStatus kg_report_min_slack(const struct KgReport *report, double *out);

/**
 * Sup over a uniform grid of `grid_points` points of the chosen residual.
 */
enum KgStatus kg_residual_sup(enum KgResidual kind,
                              const struct KgFunction *f,
                              const struct KgFunction *g,
                              size_t n,
                              size_t grid_points,
                              double *out);

/**
 * Fits `log values[i]` against `log degrees[i]` over the positive values.
 */
enum KgStatus kg_fit_rate(const size_t *degrees,
                          const double *values,
                          size_t len,
                          struct KgRateFit *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KANTOROVICH_GRUSS_H */
