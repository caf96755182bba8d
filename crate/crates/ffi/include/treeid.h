#ifndef TREEID_H
#define TREEID_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum TreeidStatus {
  TREEID_STATUS_OK = 0,
  TREEID_STATUS_NULL_ARGUMENT = 1,
  TREEID_STATUS_INVALID_UTF8 = 2,
  TREEID_STATUS_INVALID_MODEL = 3,
  TREEID_STATUS_PIT_BUDGET = 4,
  TREEID_STATUS_INCONSISTENT = 5,
  TREEID_STATUS_OUT_OF_RANGE = 6,
  TREEID_STATUS_INVALID_ARGUMENT = 7,
  TREEID_STATUS_PANIC = 8,
} TreeidStatus;

/**
 * Identifiability class of one parameter.
 */
typedef enum TreeidNodeStatus {
  TREEID_NODE_STATUS_IDENTIFIABLE = 0,
  TREEID_NODE_STATUS_TWO_IDENTIFIABLE = 1,
  TREEID_NODE_STATUS_UNIDENTIFIABLE = 2,
} TreeidNodeStatus;

/**
 * Opaque model handle.
 */
typedef struct TreeidModel TreeidModel;

/**
 * Opaque report handle.
 */
typedef struct TreeidReport TreeidReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call into this library on the same thread.
 */
const char *treeid_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *treeid_version(void);

/**
 * Parses a model from JSON or DOT text.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be a valid pointer.
 */
enum TreeidStatus treeid_model_parse(const char *text, struct TreeidModel **out);

/**
 * Number of non-root nodes `n`, or 0 for NULL.
 *
 * # Safety
 * `model` must be NULL or a handle from [`treeid_model_parse`].
 */
size_t treeid_model_n(const struct TreeidModel *model);

/**
 * Releases a model. NULL is ignored.
 *
 * # Safety
 * `model` must be NULL or a handle not yet freed.
 */
void treeid_model_free(struct TreeidModel *model);

/**
 * Identifies every parameter of `model`. `error_prob` of 0 selects the
 * default target of 2^-40.
 *
 * # Safety
 * `model` must be a live model handle; `out` must be a valid pointer.
 */
enum TreeidStatus treeid_identify(const struct TreeidModel *model,
                                  uint64_t seed,
                                  double error_prob,
                                  struct TreeidReport **out);

/**
 * Releases a report. NULL is ignored.
 *
 * # Safety
 * `report` must be NULL or a handle not yet freed.
 */
void treeid_report_free(struct TreeidReport *report);

/**
 * Status of the parameter of `node` (1..=n).
 *
 * # Safety
 * `report` must be a live report handle; `out` must be a valid pointer.
 */
enum TreeidStatus treeid_report_status(const struct TreeidReport *report,
                                       size_t node,
                                       enum TreeidNodeStatus *out);

/**
 * Closed form of branch `branch` (0, or 1 for the second of a pair) of the
 * parameter of `node`, in the textual expression syntax.
 *
 * # Safety
 * `report` must be a live report handle; `out` must be a valid pointer.
 * The returned string must be released with [`treeid_string_free`].
 */
enum TreeidStatus treeid_report_fastp(const struct TreeidReport *report,
                                      size_t node,
                                      size_t branch,
                                      char **out);

/**
 * Full report as pretty-printed JSON.
 *
 * # Safety
 * `report` must be a live report handle; `out` must be a valid pointer.
 * The returned string must be released with [`treeid_string_free`].
 */
enum TreeidStatus treeid_report_json(const struct TreeidReport *report, char **out);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must be NULL or a string from this library not yet freed.
 */
void treeid_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TREEID_H */
