#ifndef GLS_GRANGER_H
#define GLS_GRANGER_H

/* Generated by cbindgen from gls-granger-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every fallible call.
 */
typedef enum GrangerStatus {
  GRANGER_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  GRANGER_STATUS_NULL_POINTER = 1,
  /**
   * An argument violated a precondition; see the last error message.
   */
  GRANGER_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A covariance matrix was not positive definite.
   */
  GRANGER_STATUS_NOT_POSITIVE_DEFINITE = 3,
  /**
   * The design matrix was numerically collinear.
   */
  GRANGER_STATUS_COLLINEAR_DESIGN = 4,
  /**
   * An internal consistency check failed.
   */
  GRANGER_STATUS_NUMERICAL_ERROR = 5,
  /**
   * The callee panicked; state is unchanged.
   */
  GRANGER_STATUS_PANIC = 6,
} GrangerStatus;

/**
 * Opaque handle to an immutable time series.
 */
typedef struct GrangerSeries GrangerSeries;

/**
 * Outcome of one causality test.
 */
typedef struct GrangerTestOutcome {
  double statistic;
  double df1;
  double df2;
  double p_value;
  /**
   * 1 when the no-causality null was rejected, else 0.
   */
  int reject;
} GrangerTestOutcome;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a series from `len` contiguous doubles. All values must be
 * finite and `len` positive.
 */
enum GrangerStatus granger_series_create(const double *values,
                                         size_t len,
                                         struct GrangerSeries **out);

/**
 * Releases a series handle. Null is a no-op.
 */
void granger_series_free(struct GrangerSeries *series);

/**
 * Number of observations in the series.
 */
enum GrangerStatus granger_series_len(const struct GrangerSeries *series, size_t *out);

/**
 * Copies the observations into `buffer` (capacity `cap` doubles) and
 * reports how many were written.
 */
enum GrangerStatus granger_series_values(const struct GrangerSeries *series,
                                         double *buffer,
                                         size_t cap,
                                         size_t *written);

/**
 * Differences the series `order` times into a new handle.
 */
enum GrangerStatus granger_series_difference(const struct GrangerSeries *series,
                                             size_t order,
                                             struct GrangerSeries **out);

/**
 * Classical Granger F test of "`x` causes `y`" at lag `lag` and
 * significance `alpha`.
 */
enum GrangerStatus granger_classical_test(const struct GrangerSeries *x,
                                          const struct GrangerSeries *y,
                                          size_t lag,
                                          double alpha,
                                          struct GrangerTestOutcome *out);

/**
 * GLS Granger test of "`x` causes `y`" at lag `lag`, sliding-window
 * length `tau`, and significance `alpha`.
 */
enum GrangerStatus granger_gls_test(const struct GrangerSeries *x,
                                    const struct GrangerSeries *y,
                                    size_t lag,
                                    size_t tau,
                                    double alpha,
                                    struct GrangerTestOutcome *out);

/**
 * Picks the lag in `1..=p_max` minimizing the AIC of the unrestricted
 * model of `y` on both series' lags.
 */
enum GrangerStatus granger_select_lag_aic(const struct GrangerSeries *x,
                                          const struct GrangerSeries *y,
                                          size_t p_max,
                                          size_t *out);

/**
 * Copies the last error message of this thread into `buffer` (capacity
 * `cap` bytes, always NUL-terminated when `cap > 0`) and returns the full
 * message length in bytes, excluding the terminator.
 */
size_t granger_last_error_message(char *buffer, size_t cap);

/**
 * Crate version as a static NUL-terminated string.
 */
const char *granger_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GLS_GRANGER_H */
