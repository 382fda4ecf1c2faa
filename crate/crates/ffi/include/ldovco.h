#ifndef LDOVCO_H
#define LDOVCO_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LdovcoStatus {
  LDOVCO_STATUS_OK = 0,
  LDOVCO_STATUS_NULL_POINTER = 1,
  LDOVCO_STATUS_INVALID_ARGUMENT = 2,
  LDOVCO_STATUS_PARSE = 3,
  LDOVCO_STATUS_EVALUATION = 4,
  LDOVCO_STATUS_IO = 5,
  LDOVCO_STATUS_PANIC = 6,
} LdovcoStatus;

typedef enum LdovcoBundledPoint {
  LDOVCO_BUNDLED_POINT_CODESIGN = 0,
  LDOVCO_BUNDLED_POINT_SEQUENTIAL = 1,
} LdovcoBundledPoint;

typedef enum LdovcoMode {
  LDOVCO_MODE_IDEAL = 0,
  LDOVCO_MODE_COUPLED = 1,
} LdovcoMode;

typedef enum LdovcoFlow {
  LDOVCO_FLOW_CODESIGN = 0,
  LDOVCO_FLOW_SEQUENTIAL = 1,
} LdovcoFlow;

/**
 * Opaque sizing problem with its behavioral constants.
 */
typedef struct LdovcoProblem LdovcoProblem;

/**
 * Performance of one design, SI units, phase noise in dBc/Hz.
 */
typedef struct LdovcoMetrics {
  double f0;
  double pn100k;
  double pn1m;
  double pn10m;
  double pdyn;
  double psr_max;
  double pm;
  double vdd_max;
  double startup_margin;
  double fom;
} LdovcoMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into this library from the same thread.
 */
const char *ldovco_last_error(void);

/**
 * Figure of merit in dBc/Hz from frequency, offset (Hz), phase noise at
 * that offset (dBc/Hz) and power (W).
 *
 * # Safety
 * `out` must be writable.
 */
enum LdovcoStatus ldovco_fom(double f0, double delta_f, double pn, double pdyn, double *out);

/**
 * Bundled 43-variable problem with default constants.
 *
 * # Safety
 * `out` must be writable; the handle is freed with `ldovco_problem_free`.
 */
enum LdovcoStatus ldovco_problem_bundled(struct LdovcoProblem **out);

/**
 * Problem loaded from a problem file and an optional constants file
 * (`constants_path` may be null).
 *
 * # Safety
 * Paths must be null or NUL-terminated; `out` must be writable.
 */
enum LdovcoStatus ldovco_problem_load(const char *problem_path,
                                      const char *constants_path,
                                      struct LdovcoProblem **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `p` must come from this library and not be used afterwards.
 */
void ldovco_problem_free(struct LdovcoProblem *p);

/**
 * Number of design variables.
 *
 * # Safety
 * `p` must be a live handle.
 */
enum LdovcoStatus ldovco_problem_dim(const struct LdovcoProblem *p, size_t *out);

/**
 * Number of corners the problem checks, nominal included.
 *
 * # Safety
 * `p` must be a live handle.
 */
enum LdovcoStatus ldovco_problem_corner_count(const struct LdovcoProblem *p, size_t *out);

/**
 * Copies one of the bundled reference designs into `values`.
 *
 * # Safety
 * `values` must hold `len` doubles.
 */
enum LdovcoStatus ldovco_bundled_point(enum LdovcoBundledPoint which, double *values, size_t len);

/**
 * Evaluates a design at one corner (index into the problem's corner list).
 *
 * # Safety
 * `values` must hold `len` doubles; `out` must be writable.
 */
enum LdovcoStatus ldovco_evaluate(const struct LdovcoProblem *p,
                                  const double *values,
                                  size_t len,
                                  enum LdovcoMode mode,
                                  size_t corner,
                                  struct LdovcoMetrics *out);

/**
 * Worst case over all corners in coupled mode and its constraint violation.
 *
 * # Safety
 * `values` must hold `len` doubles; outputs must be writable.
 */
enum LdovcoStatus ldovco_evaluate_worst(const struct LdovcoProblem *p,
                                        const double *values,
                                        size_t len,
                                        struct LdovcoMetrics *out,
                                        double *violation);

/**
 * Runs a sizing flow with default optimizer settings. The final design is
 * written to `values` (`len` = problem dimension) with its coupled
 * worst-case metrics and violation.
 *
 * # Safety
 * `values` must hold `len` doubles; outputs must be writable.
 */
enum LdovcoStatus ldovco_run_flow(const struct LdovcoProblem *p,
                                  enum LdovcoFlow flow,
                                  uint64_t seed,
                                  size_t budget,
                                  double *values,
                                  size_t len,
                                  struct LdovcoMetrics *worst,
                                  double *violation);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LDOVCO_H */
