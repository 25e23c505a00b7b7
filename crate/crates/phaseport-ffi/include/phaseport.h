#ifndef PHASEPORT_H
#define PHASEPORT_H

/* Generated by cbindgen from phaseport-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of a C-ABI call.
 */
typedef enum PpStatus {
  /**
   * Success.
   */
  PP_STATUS_OK = 0,
  /**
   * An expression failed to parse.
   */
  PP_STATUS_PARSE_ERROR = 2,
  /**
   * Evaluation left the field's domain.
   */
  PP_STATUS_DOMAIN_ERROR = 3,
  /**
   * A computation failed (zero on circle, no convergence, ...).
   */
  PP_STATUS_COMPUTE_ERROR = 4,
  /**
   * A required pointer argument was null.
   */
  PP_STATUS_NULL_POINTER = 5,
  /**
   * A string argument was not valid UTF-8.
   */
  PP_STATUS_INVALID_UTF8 = 6,
  /**
   * A numeric argument was out of range.
   */
  PP_STATUS_INVALID_ARGUMENT = 7,
} PpStatus;

/**
 * Opaque parsed vector field.
 */
typedef struct PpField PpField;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread, or null if
 * the last call succeeded. The pointer stays valid until the next
 * failing call on the same thread; do not free it.
 */
const char *pp_last_error_message(void);

/**
 * Library version as a static C string.
 */
const char *pp_version(void);

/**
 * Parses the two component expressions into a field handle.
 *
 * # Safety
 * `fx` and `fy` must be valid NUL-terminated strings and `out` a valid
 * pointer. On success `*out` owns a field that must be released with
 * [`pp_field_free`].
 */
enum PpStatus pp_field_parse(const char *fx, const char *fy, struct PpField **out);

/**
 * Releases a field handle. Null is ignored.
 *
 * # Safety
 * `field` must be null or a pointer returned by [`pp_field_parse`] that
 * has not been freed yet.
 */
void pp_field_free(struct PpField *field);

/**
 * Evaluates X(x, y) into `out_xy[0]`, `out_xy[1]`.
 *
 * # Safety
 * `field` must be a live handle and `out_xy` must point to at least two
 * doubles.
 */
enum PpStatus pp_field_eval(const struct PpField *field, double x, double y, double *out_xy);

/**
 * Writes the Jacobian at (x, y) row-major into `out_m[0..4]`.
 *
 * # Safety
 * `field` must be a live handle and `out_m` must point to at least four
 * doubles.
 */
enum PpStatus pp_field_jacobian(const struct PpField *field, double x, double y, double *out_m);

/**
 * Poincaré index of the field along the circle of the given center and
 * radius.
 *
 * # Safety
 * `field` must be a live handle and `out_index` a valid pointer.
 */
enum PpStatus pp_poincare_index(const struct PpField *field,
                                double center_x,
                                double center_y,
                                double radius,
                                int64_t *out_index);

/**
 * Runs the full analysis over [xmin, xmax] x [ymin, ymax] and returns
 * the JSON report. The returned string must be released with
 * [`pp_string_free`].
 *
 * # Safety
 * `field` must be a live handle and `out_json` a valid pointer.
 */
enum PpStatus pp_analyze_json(const struct PpField *field,
                              double xmin,
                              double xmax,
                              double ymin,
                              double ymax,
                              uint32_t grid,
                              uint64_t seed,
                              char **out_json);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a pointer produced by this library and not freed
 * yet.
 */
void pp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHASEPORT_H */
