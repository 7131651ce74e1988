#ifndef FRACLAB_H
#define FRACLAB_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum FraclabStatus {
  FRACLAB_STATUS_OK = 0,
  FRACLAB_STATUS_NULL_POINTER = 1,
  FRACLAB_STATUS_INVALID_UTF8 = 2,
  /**
   * Parameters or config rejected.
   */
  FRACLAB_STATUS_VALIDATION = 3,
  FRACLAB_STATUS_DIVERGENT = 4,
  FRACLAB_STATUS_NUMERICAL = 5,
  FRACLAB_STATUS_UNSUPPORTED = 6,
  FRACLAB_STATUS_IO = 7,
  FRACLAB_STATUS_PANIC = 8,
} FraclabStatus;

/**
 * Trial function handle.
 */
typedef struct FraclabFunction FraclabFunction;

/**
 * Parameter set handle.
 */
typedef struct FraclabParams FraclabParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. Valid until the next
 * failing call on the same thread.
 */
const char *fraclab_last_error(void);

/**
 * Builds a trial function from its JSON description, e.g.
 * `{"family": "smooth_bump", "d": 1}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FraclabStatus fraclab_function_from_json(const char *json, struct FraclabFunction **out);

/**
 * # Safety
 * `f` must come from this library or be NULL.
 */
void fraclab_function_free(struct FraclabFunction *f);

/**
 * Evaluates `f` at the point `x` of length `len`.
 *
 * # Safety
 * `x` must point to `len` doubles.
 */
enum FraclabStatus fraclab_function_eval(const struct FraclabFunction *f,
                                         const double *x,
                                         size_t len,
                                         double *out);

/**
 * New parameter set in dimension `d` with all exponents unset.
 */
struct FraclabParams *fraclab_params_new(size_t d);

/**
 * # Safety
 * `p` must come from this library or be NULL.
 */
void fraclab_params_free(struct FraclabParams *p);

/**
 * Sets one of `p, q, r, s, alpha1, alpha2, beta, mu, lambda`.
 *
 * # Safety
 * `params` must be a live handle and `name` a NUL-terminated string.
 */
enum FraclabStatus fraclab_params_set(struct FraclabParams *params, const char *name, double value);

/**
 * Both sides of the balance condition for `kind` (`ordinary`, `mixed`,
 * `derivative` or `surface`; `m` is used by `surface` only).
 *
 * # Safety
 * Pointers must be valid; `kind` NUL-terminated.
 */
enum FraclabStatus fraclab_balance(const struct FraclabParams *params,
                                   const char *kind,
                                   size_t m,
                                   double *lhs,
                                   double *rhs);

/**
 * Weighted target norm over the ball of `radius` (whole space when
 * `radius` is not a positive finite number).
 *
 * # Safety
 * Pointers must be valid.
 */
enum FraclabStatus fraclab_target_norm(const struct FraclabFunction *f,
                                       const struct FraclabParams *params,
                                       double radius,
                                       double *value,
                                       double *error);

/**
 * Gagliardo seminorm over the ball of `radius` (whole space as above).
 *
 * # Safety
 * Pointers must be valid.
 */
enum FraclabStatus fraclab_gagliardo_seminorm(const struct FraclabFunction *f,
                                              const struct FraclabParams *params,
                                              double radius,
                                              double *value,
                                              double *error);

/**
 * Runs a JSON or TOML run configuration and returns the report as JSON.
 * Release the string with [`fraclab_string_free`].
 *
 * # Safety
 * `config` must be NUL-terminated and `out` valid.
 */
enum FraclabStatus fraclab_run(const char *config, char **out);

/**
 * # Safety
 * `s` must come from this library or be NULL.
 */
void fraclab_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRACLAB_H */
