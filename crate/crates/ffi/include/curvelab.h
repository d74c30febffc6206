#ifndef CURVELAB_H
#define CURVELAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CurvelabStatus {
  CURVELAB_STATUS_OK = 0,
  CURVELAB_STATUS_NULL_POINTER = 1,
  CURVELAB_STATUS_INVALID_UTF8 = 2,
  /**
   * Invalid configuration, unknown command or unknown name.
   */
  CURVELAB_STATUS_CONFIG = 3,
  /**
   * A module operation failed.
   */
  CURVELAB_STATUS_MODULE = 4,
  CURVELAB_STATUS_PANIC = 5,
} CurvelabStatus;

/**
 * Overall status of a report.
 */
typedef enum CurvelabCheckStatus {
  CURVELAB_CHECK_STATUS_PASS = 0,
  CURVELAB_CHECK_STATUS_WARN = 1,
  CURVELAB_CHECK_STATUS_FAIL = 2,
} CurvelabCheckStatus;

/**
 * Opaque curve handle.
 */
typedef struct CurvelabCurve CurvelabCurve;

/**
 * Opaque report handle.
 */
typedef struct CurvelabReport CurvelabReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Owned by the
 * library; valid until the next failing call on the same thread.
 */
const char *curvelab_last_error(void);

/**
 * Library version string; static.
 */
const char *curvelab_version(void);

/**
 * Looks up a corpus curve (`moment-3`, `cusp`, `random-<seed>`, ...).
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum CurvelabStatus curvelab_curve_from_corpus(const char *name, struct CurvelabCurve **out);

/**
 * Parses a curve spec (`dim = ...`, `coeffs = [["p/q", ...], ...]`).
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum CurvelabStatus curvelab_curve_from_toml(const char *text, struct CurvelabCurve **out);

/**
 * Ambient dimension, or 0 for a null handle.
 *
 * # Safety
 * `curve` must be null or a live handle.
 */
size_t curvelab_curve_dim(const struct CurvelabCurve *curve);

/**
 * Torsion determinant at `s`.
 *
 * # Safety
 * `curve` must be a live handle; `out` must be writable.
 */
enum CurvelabStatus curvelab_curve_torsion(const struct CurvelabCurve *curve,
                                           double s,
                                           double *out);

/**
 * Writes the `dim` coordinates of the curve at `s` into `out`.
 *
 * # Safety
 * `curve` must be a live handle; `out` must hold `len` doubles.
 */
enum CurvelabStatus curvelab_curve_eval(const struct CurvelabCurve *curve,
                                        double s,
                                        double *out,
                                        size_t len);

/**
 * # Safety
 * `curve` must be null or a handle not yet freed.
 */
void curvelab_curve_free(struct CurvelabCurve *curve);

/**
 * Runs `command` (e.g. `verify-geometric`) under a TOML run configuration.
 * A report whose checks fail is still returned with status `Ok`; inspect
 * it with [`curvelab_report_status`].
 *
 * # Safety
 * `command` and `config_toml` must be NUL-terminated strings; `out` must be
 * writable.
 */
enum CurvelabStatus curvelab_run(const char *command,
                                 const char *config_toml,
                                 struct CurvelabReport **out);

/**
 * Worst check status; `Fail` for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
enum CurvelabCheckStatus curvelab_report_status(const struct CurvelabReport *report);

/**
 * Report text, with the timing section when `with_timing` is true.
 * Release the string with [`curvelab_string_free`].
 *
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum CurvelabStatus curvelab_report_emit(const struct CurvelabReport *report,
                                         bool with_timing,
                                         char **out);

/**
 * One table of the report as CSV. Release with [`curvelab_string_free`].
 *
 * # Safety
 * `report` must be a live handle; `which` a NUL-terminated string; `out`
 * writable.
 */
enum CurvelabStatus curvelab_report_plot_data(const struct CurvelabReport *report,
                                              const char *which,
                                              char **out);

/**
 * # Safety
 * `report` must be null or a handle not yet freed.
 */
void curvelab_report_free(struct CurvelabReport *report);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void curvelab_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CURVELAB_H */
