#ifndef GPDIAG_H
#define GPDIAG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GpdiagStatus {
  GPDIAG_STATUS_OK = 0,
  GPDIAG_STATUS_NULL_POINTER = 1,
  GPDIAG_STATUS_INVALID_UTF8 = 2,
  GPDIAG_STATUS_IO = 3,
  GPDIAG_STATUS_PARSE = 4,
  GPDIAG_STATUS_SHAPE = 5,
  GPDIAG_STATUS_INVALID_ARGUMENT = 6,
  GPDIAG_STATUS_NUMERICAL = 7,
  GPDIAG_STATUS_BUFFER_TOO_SMALL = 8,
  GPDIAG_STATUS_PANIC = 9,
} GpdiagStatus;

/**
 * A loaded extractor plus one-against-all ensemble.
 */
typedef struct GpdiagDiagnoser GpdiagDiagnoser;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Loads `model.json` and `extractor.json`. On success `*out` owns a handle
 * to release with [`gpdiag_diagnoser_free`].
 *
 * # Safety
 * Paths must be NUL-terminated strings; `out` must be writable.
 */
enum GpdiagStatus gpdiag_diagnoser_load(const char *model_path,
                                        const char *extractor_path,
                                        struct GpdiagDiagnoser **out);

/**
 * Same as [`gpdiag_diagnoser_load`] from in-memory JSON documents.
 *
 * # Safety
 * Both documents must be NUL-terminated strings; `out` must be writable.
 */
enum GpdiagStatus gpdiag_diagnoser_from_json(const char *model_json,
                                             const char *extractor_json,
                                             struct GpdiagDiagnoser **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `h` must come from this library and not be used afterwards.
 */
void gpdiag_diagnoser_free(struct GpdiagDiagnoser *h);

/**
 * Number of classes K.
 *
 * # Safety
 * `h` must be a live handle and `out` writable.
 */
enum GpdiagStatus gpdiag_diagnoser_num_classes(const struct GpdiagDiagnoser *h, size_t *out);

/**
 * Values per input sample (all channels, concatenated).
 *
 * # Safety
 * `h` must be a live handle and `out` writable.
 */
enum GpdiagStatus gpdiag_diagnoser_input_len(const struct GpdiagDiagnoser *h, size_t *out);

/**
 * Copies the K class ids, ascending, into `out`.
 *
 * # Safety
 * `out` must have room for `capacity` values.
 */
enum GpdiagStatus gpdiag_diagnoser_class_ids(const struct GpdiagDiagnoser *h,
                                             uint32_t *out,
                                             size_t capacity);

/**
 * Diagnoses one sample. Writes the raw per-class probabilities in class-id
 * order to `out_raw` and the decided class to `out_decision`.
 *
 * # Safety
 * `sample` must hold `len` values and `out_raw` room for `capacity`.
 */
enum GpdiagStatus gpdiag_diagnose(const struct GpdiagDiagnoser *h,
                                  const double *sample,
                                  size_t len,
                                  double *out_raw,
                                  size_t capacity,
                                  uint32_t *out_decision);

/**
 * Diagnoses one sample and returns the full report as JSON
 * (`raw`, `normalized`, `decision`, `runner_up`). Free the string with
 * [`gpdiag_string_free`].
 *
 * # Safety
 * `sample` must hold `len` values; `out_json` must be writable.
 */
enum GpdiagStatus gpdiag_diagnose_json(const struct GpdiagDiagnoser *h,
                                       const double *sample,
                                       size_t len,
                                       char **out_json);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void gpdiag_string_free(char *s);

/**
 * Message for the last failed call on this thread; empty if none. Valid
 * until the next failing call on the same thread.
 */
const char *gpdiag_last_error_message(void);

/**
 * Library version, static storage.
 */
const char *gpdiag_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GPDIAG_H */
