/* C interface to the lsade optimizer. */

#ifndef LSADE_H
#define LSADE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code returned by every fallible function in this interface.
 */
typedef enum LsadeStatus {
  /**
   * The call succeeded.
   */
  LSADE_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  LSADE_STATUS_NULL_ARGUMENT = 1,
  /**
   * An argument failed validation; see `lsade_last_error`.
   */
  LSADE_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The objective callback returned a nonzero code.
   */
  LSADE_STATUS_OBJECTIVE_FAILURE = 3,
  /**
   * The objective produced a NaN or infinite value.
   */
  LSADE_STATUS_NON_FINITE_VALUE = 4,
  /**
   * A surrogate model could not be fitted.
   */
  LSADE_STATUS_SURROGATE_FAILURE = 5,
  /**
   * An unexpected internal error; see `lsade_last_error`.
   */
  LSADE_STATUS_INTERNAL = 6,
  /**
   * A panic was caught at the boundary; the handle remains usable.
   */
  LSADE_STATUS_PANIC = 7,
} LsadeStatus;

/**
 * Opaque optimizer configuration. Create with [`lsade_config_new`], release
 * with [`lsade_config_free`].
 */
typedef struct LsadeConfigHandle LsadeConfigHandle;

/**
 * Objective callback. Receives the candidate point `x` of length `dim` and
 * the opaque `user_data` pointer passed to `lsade_optimize`; writes the
 * objective value through `out` and returns zero, or returns nonzero to
 * abort the run (the nonzero code is echoed in the error message).
 */
typedef int32_t (*LsadeObjective)(const double *x, size_t dim, void *user_data, double *out);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns the message for the most recent failure on this thread, or an
 * empty string if the last call succeeded. The pointer stays valid until the
 * next interface call on the same thread; copy it if you need to keep it.
 */
const char *lsade_last_error(void);

/**
 * Returns the library version as a static nul-terminated string.
 */
const char *lsade_version(void);

/**
 * Creates a configuration for the box `[lower[i], upper[i]]`, `i < dim`,
 * with conventional defaults (budget 1000, 100 initial points, multiquadric
 * kernel, every component firing each iteration). Returns null and sets the
 * error message if the bounds are invalid.
 *
 * # Safety
 * `lower` and `upper` must point to `dim` readable doubles each.
 */
struct LsadeConfigHandle *lsade_config_new(size_t dim,
                                           const double *lower,
                                           const double *upper,
                                           uint64_t seed);

/**
 * Releases a configuration. Null is accepted and ignored.
 *
 * # Safety
 * `cfg` must be null or a pointer returned by [`lsade_config_new`] that has
 * not been freed yet.
 */
void lsade_config_free(struct LsadeConfigHandle *cfg);

/**
 * Sets the total objective-call budget, initial design included.
 *
 * # Safety
 * `cfg` must be a live pointer from [`lsade_config_new`].
 */
enum LsadeStatus lsade_config_set_budget(struct LsadeConfigHandle *cfg, size_t nfe_max);

/**
 * Sets the size of the Latin hypercube initial design.
 *
 * # Safety
 * `cfg` must be a live pointer from [`lsade_config_new`].
 */
enum LsadeStatus lsade_config_set_initial_points(struct LsadeConfigHandle *cfg,
                                                 size_t initial_points);

/**
 * Sets the RNG seed; equal seeds reproduce runs exactly.
 *
 * # Safety
 * `cfg` must be a live pointer from [`lsade_config_new`].
 */
enum LsadeStatus lsade_config_set_seed(struct LsadeConfigHandle *cfg, uint64_t seed);

/**
 * Selects the surrogate kernel by name (`multiquadric`/`mq`, `cubic`,
 * `thin_plate_spline`/`tps`, `linear`, `gaussian`) with shape parameter `c`
 * (ignored by kernels that take none; pass 1.0).
 *
 * # Safety
 * `cfg` must be a live pointer from [`lsade_config_new`]; `name` must be a
 * nul-terminated string.
 */
enum LsadeStatus lsade_config_set_kernel(struct LsadeConfigHandle *cfg, const char *name, double c);

/**
 * Sets the component schedule from its textual form, e.g. `static:1,2,4` or
 * `dynamic:1-4|8-1`.
 *
 * # Safety
 * `cfg` must be a live pointer from [`lsade_config_new`]; `rule` must be a
 * nul-terminated string.
 */
enum LsadeStatus lsade_config_set_schedule(struct LsadeConfigHandle *cfg, const char *rule);

/**
 * Sets the differential-evolution scale factor `F` and crossover rate `Cr`.
 *
 * # Safety
 * `cfg` must be a live pointer from [`lsade_config_new`].
 */
enum LsadeStatus lsade_config_set_de(struct LsadeConfigHandle *cfg, double f_weight, double cr);

/**
 * Sets the growth factor of the Lipschitz-constant estimation grid.
 *
 * # Safety
 * `cfg` must be a live pointer from [`lsade_config_new`].
 */
enum LsadeStatus lsade_config_set_alpha(struct LsadeConfigHandle *cfg, double alpha);

/**
 * When `strict` is nonzero, proposals that duplicate an archived point are
 * still evaluated and spend budget; by default they are skipped for free.
 *
 * # Safety
 * `cfg` must be a live pointer from [`lsade_config_new`].
 */
enum LsadeStatus lsade_config_set_strict_budget(struct LsadeConfigHandle *cfg, int32_t strict);

/**
 * Runs the optimizer. On success writes the best point found into `best_x`
 * (a caller-owned buffer of the configured dimension), its objective value
 * into `best_f`, and the number of objective calls into `nfe`; each of the
 * three may be null to skip that output. The callback is invoked on the
 * calling thread.
 *
 * # Safety
 * `cfg` must be a live pointer from [`lsade_config_new`]; `best_x`, if
 * non-null, must point to `dim` writable doubles; `best_f` and `nfe`, if
 * non-null, must be writable. The callback must either write a double
 * through `out` and return zero, or return nonzero.
 */
enum LsadeStatus lsade_optimize(const struct LsadeConfigHandle *cfg,
                                LsadeObjective objective,
                                void *user_data,
                                double *best_x,
                                double *best_f,
                                size_t *nfe);

/**
 * Evaluates a built-in benchmark problem (`ellipsoid`, `rosenbrock`,
 * `ackley`, `griewank`) at `x` and writes the value through `out`.
 *
 * # Safety
 * `name` must be a nul-terminated string, `x` must point to `dim` readable
 * doubles, and `out` must be writable.
 */
enum LsadeStatus lsade_benchmark_eval(const char *name, const double *x, size_t dim, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LSADE_H */
