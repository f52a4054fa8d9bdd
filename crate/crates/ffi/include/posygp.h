#ifndef POSYGP_H
#define POSYGP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define PGP_SCENARIO_LOW 0

#define PGP_SCENARIO_MID 1

#define PGP_SCENARIO_HIGH 2

typedef enum PgpStatus {
  PGP_STATUS_OK = 0,
  PGP_STATUS_NULL_POINTER = 1,
  PGP_STATUS_PARSE_ERROR = 2,
  PGP_STATUS_INFEASIBLE_DUAL = 3,
  /**
   * A result is still produced, holding the best iterate.
   */
  PGP_STATUS_NON_CONVERGED = 4,
  PGP_STATUS_INVALID_ARGUMENT = 5,
  PGP_STATUS_INVALID_UTF8 = 6,
  PGP_STATUS_BUFFER_TOO_SMALL = 7,
  PGP_STATUS_NO_PRIMAL = 8,
  PGP_STATUS_PANIC = 9,
} PgpStatus;

typedef enum PgpVerdict {
  PGP_VERDICT_CERTIFIED = 0,
  PGP_VERDICT_GAP_TOO_LARGE = 1,
  PGP_VERDICT_INFEASIBLE_PRIMAL = 2,
  /**
   * No primal point was recovered, so nothing was certified.
   */
  PGP_VERDICT_NOT_CERTIFIED = 3,
} PgpVerdict;

/**
 * A parsed and validated problem.
 */
typedef struct PgpProblem PgpProblem;

/**
 * The outcome of one scenario solve.
 */
typedef struct PgpResult PgpResult;

typedef struct PgpOptions {
  double tol;
  size_t max_iter;
  double barrier_init;
  double barrier_shrink;
  double barrier_min;
  double zero_weight_threshold;
  uint64_t seed;
} PgpOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The library's default solver options.
 */
struct PgpOptions pgp_default_options(void);

/**
 * Version string; static, never freed.
 */
const char *pgp_version(void);

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call into the library on the same thread.
 */
const char *pgp_last_error_message(void);

/**
 * Parses a JSON problem document.
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` a valid pointer.
 */
enum PgpStatus pgp_problem_from_json(const char *json, struct PgpProblem **out);

/**
 * # Safety
 * `problem` must be null or a live handle from [`pgp_problem_from_json`].
 */
size_t pgp_problem_num_variables(const struct PgpProblem *problem);

/**
 * # Safety
 * `problem` must be null or a handle from [`pgp_problem_from_json`] that
 * has not been freed.
 */
void pgp_problem_free(struct PgpProblem *problem);

/**
 * Solves one scenario (`PGP_SCENARIO_*`). `options` may be null for the
 * defaults. On `PGP_STATUS_OK` and `PGP_STATUS_NON_CONVERGED` a result is
 * stored in `out` and must be freed with [`pgp_result_free`].
 *
 * # Safety
 * `problem` must be a live handle and `out` a valid pointer; `options` must
 * be null or point to a valid `PgpOptions`.
 */
enum PgpStatus pgp_solve(const struct PgpProblem *problem,
                         uint32_t scenario,
                         const struct PgpOptions *options,
                         struct PgpResult **out);

/**
 * Optimal dual value `Z`, or NaN for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
double pgp_result_dual_value(const struct PgpResult *result);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
size_t pgp_result_num_weights(const struct PgpResult *result);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
size_t pgp_result_iterations(const struct PgpResult *result);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
double pgp_result_kkt_residual(const struct PgpResult *result);

/**
 * Copies the dual weights, objective terms first, into `buf`.
 *
 * # Safety
 * `result` must be a live handle and `buf` must hold `len` doubles.
 */
enum PgpStatus pgp_result_weights(const struct PgpResult *result, double *buf, size_t len);

/**
 * Copies the recovered primal point into `buf`, which must hold
 * [`pgp_problem_num_variables`] values.
 *
 * # Safety
 * `result` must be a live handle and `buf` must hold `len` doubles.
 */
enum PgpStatus pgp_result_primal(const struct PgpResult *result, double *buf, size_t len);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
enum PgpVerdict pgp_result_verdict(const struct PgpResult *result);

/**
 * Relative primal/dual gap, or NaN when nothing was certified.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
double pgp_result_relative_gap(const struct PgpResult *result);

/**
 * # Safety
 * `result` must be null or a handle from [`pgp_solve`] that has not been
 * freed.
 */
void pgp_result_free(struct PgpResult *result);

/**
 * Solves all three scenarios and writes the JSON run report to `out`; free
 * it with [`pgp_string_free`]. `exit_code` (nullable) receives the code the
 * command-line tool would exit with.
 *
 * # Safety
 * `problem` must be a live handle, `out` a valid pointer, `options` null or
 * valid, and `exit_code` null or valid.
 */
enum PgpStatus pgp_report_json(const struct PgpProblem *problem,
                               const struct PgpOptions *options,
                               char **out,
                               int32_t *exit_code);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void pgp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POSYGP_H */
