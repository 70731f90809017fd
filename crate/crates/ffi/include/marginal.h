#ifndef MARGINAL_H
#define MARGINAL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum MarginalStatus {
  MARGINAL_STATUS_OK = 0,
  MARGINAL_STATUS_NULL_POINTER = 1,
  MARGINAL_STATUS_INVALID_ARGUMENT = 2,
  MARGINAL_STATUS_UNKNOWN_ENTRY = 3,
  MARGINAL_STATUS_PARAM_CONSTRAINT = 4,
  MARGINAL_STATUS_PIPELINE = 5,
  MARGINAL_STATUS_PANIC = 6,
} MarginalStatus;

typedef enum MarginalVerdict {
  MARGINAL_VERDICT_MARGINALLY_TRAPPED = 0,
  MARGINAL_VERDICT_NOT_MARGINAL = 1,
  MARGINAL_VERDICT_INCONCLUSIVE = 2,
} MarginalVerdict;

/**
 * Opaque lifted immersion.
 */
typedef struct MarginalLift MarginalLift;

/**
 * Opaque verification report.
 */
typedef struct MarginalReport MarginalReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into this library on the same thread.
 */
const char *marginal_last_error(void);

/**
 * Builds the lift of catalog entry `entry`.
 *
 * `params` (`key=val,...`) and `ambient` may be null. For hypersurface
 * entries `root_index` selects the root of the curvature polynomial.
 *
 * # Safety
 * String arguments are null or valid NUL-terminated strings; `out` is a valid
 * pointer to writable storage.
 */
enum MarginalStatus marginal_lift_from_catalog(const char *entry,
                                               const char *params,
                                               const char *ambient,
                                               uint32_t root_index,
                                               struct MarginalLift **out);

/**
 * Number of lifts the hypersurface entry admits in `ambient` (null for the
 * entry's default); lift entries count as one.
 *
 * # Safety
 * As for [`marginal_lift_from_catalog`].
 */
enum MarginalStatus marginal_root_count(const char *entry,
                                        const char *params,
                                        const char *ambient,
                                        size_t *out);

/**
 * Resamples the lift on an `nx` by `ny` grid (each at least 3).
 *
 * # Safety
 * `lift` is null or a live handle.
 */
enum MarginalStatus marginal_lift_set_grid(struct MarginalLift *lift, uint32_t nx, uint32_t ny);

/**
 * Overrides the finite-difference step and the marginality tolerance; a
 * non-positive value keeps the current setting.
 *
 * # Safety
 * `lift` is null or a live handle.
 */
enum MarginalStatus marginal_lift_set_tolerances(struct MarginalLift *lift,
                                                 double step,
                                                 double tol_marginal);

/**
 * Chart and container dimensions of the lift.
 *
 * # Safety
 * `lift` is null or a live handle; the out pointers are null or writable.
 */
enum MarginalStatus marginal_lift_dims(const struct MarginalLift *lift,
                                       size_t *chart_dim,
                                       size_t *ambient_dim);

/**
 * Evaluates the lift at chart point `x` (`x_len` values) into `out`
 * (`out_len` values, at least the container dimension).
 *
 * # Safety
 * `x` points to `x_len` readable doubles and `out` to `out_len` writable ones.
 */
enum MarginalStatus marginal_lift_eval(const struct MarginalLift *lift,
                                       const double *x,
                                       size_t x_len,
                                       double *out,
                                       size_t out_len);

/**
 * Verifies the lift on its grid.
 *
 * # Safety
 * `lift` is null or a live handle; `out` is writable.
 */
enum MarginalStatus marginal_verify(const struct MarginalLift *lift, struct MarginalReport **out);

/**
 * # Safety
 * `report` is null or a live handle; `out` is writable.
 */
enum MarginalStatus marginal_report_verdict(const struct MarginalReport *report,
                                            enum MarginalVerdict *out);

/**
 * Largest normalized null residual over the grid; NaN when no sample succeeded.
 *
 * # Safety
 * `report` is null or a live handle; `out` is writable.
 */
enum MarginalStatus marginal_report_max_null_residual(const struct MarginalReport *report,
                                                      double *out);

/**
 * Sample and excluded-sample counts.
 *
 * # Safety
 * `report` is null or a live handle; the out pointers are writable.
 */
enum MarginalStatus marginal_report_counts(const struct MarginalReport *report,
                                           size_t *samples,
                                           size_t *excluded);

/**
 * # Safety
 * `lift` is null or a handle from this library not yet freed.
 */
void marginal_lift_free(struct MarginalLift *lift);

/**
 * # Safety
 * `report` is null or a handle from this library not yet freed.
 */
void marginal_report_free(struct MarginalReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MARGINAL_H */
