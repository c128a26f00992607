/* Generated by cbindgen from crates/mapkit-ffi/src/lib.rs. Do not edit. */

#ifndef MAPKIT_H
#define MAPKIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum MapkitStatus {
  MAPKIT_STATUS_OK = 0,
  MAPKIT_STATUS_NULL_ARGUMENT = 1,
  MAPKIT_STATUS_INVALID_UTF8 = 2,
  MAPKIT_STATUS_PARSE = 3,
  /**
   * Inconsistent initial statements, non-definite theory, unknown
   * action category and the like.
   */
  MAPKIT_STATUS_SEMANTIC = 4,
  /**
   * The plan was not executable in some state; the result is the failed
   * b-state.
   */
  MAPKIT_STATUS_PLAN_FAILED = 5,
  MAPKIT_STATUS_OUT_OF_RANGE = 6,
  MAPKIT_STATUS_PANIC = 7,
} MapkitStatus;

/**
 * A b-state: a set of pointed Kripke structures, or the failed state.
 */
typedef struct MapkitState MapkitState;

/**
 * A parsed action theory.
 */
typedef struct MapkitTheory MapkitTheory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The message of the last failed call on this thread, or an empty string.
 * Valid until the next call into the library on this thread.
 */
const char *mapkit_last_error(void);

/**
 * Parses theory source text.
 *
 * # Safety
 * `source` must be a NUL-terminated string and `out` a valid pointer.
 */
enum MapkitStatus mapkit_theory_parse(const char *source, struct MapkitTheory **out);

/**
 * # Safety
 * `theory` must come from [`mapkit_theory_parse`] and not be freed twice.
 */
void mapkit_theory_free(struct MapkitTheory *theory);

/**
 * Generates the initial b-state, optionally completing the initial
 * statements under the closed world assumption.
 *
 * # Safety
 * `theory` must be a live handle and `out` a valid pointer.
 */
enum MapkitStatus mapkit_initial_state(const struct MapkitTheory *theory,
                                       bool cwa,
                                       struct MapkitState **out);

/**
 * Reads a state document (text or JSON) against the theory's signature.
 *
 * # Safety
 * `theory` must be a live handle, `document` NUL-terminated and `out` valid.
 */
enum MapkitStatus mapkit_state_parse(const struct MapkitTheory *theory,
                                     const char *document,
                                     struct MapkitState **out);

/**
 * # Safety
 * `state` must come from this library and not be freed twice.
 */
void mapkit_state_free(struct MapkitState *state);

/**
 * Executes a plan such as `"a; b"` (empty for no actions). The resulting
 * handle is written to `out` even when the status is
 * [`MapkitStatus::PlanFailed`], in which case it holds the failed b-state.
 *
 * # Safety
 * Handles must be live, `plan` NUL-terminated and `out` valid.
 */
enum MapkitStatus mapkit_exec(const struct MapkitTheory *theory,
                              const struct MapkitState *state,
                              const char *plan,
                              struct MapkitState **out);

/**
 * Decides a query `goal after plan` from `state`.
 *
 * # Safety
 * Handles must be live, `query` NUL-terminated and `verdict` valid.
 */
enum MapkitStatus mapkit_query(const struct MapkitTheory *theory,
                               const struct MapkitState *state,
                               const char *query,
                               bool *verdict);

/**
 * Number of pointed structures in the b-state; 0 for the failed state.
 *
 * # Safety
 * `state` must be a live handle and `len` valid.
 */
enum MapkitStatus mapkit_state_len(const struct MapkitState *state, size_t *len);

/**
 * Number of worlds in the `index`-th pointed structure.
 *
 * # Safety
 * `state` must be a live handle and `worlds` valid.
 */
enum MapkitStatus mapkit_state_worlds(const struct MapkitState *state,
                                      size_t index,
                                      size_t *worlds);

/**
 * Renders the b-state as a state document, text or JSON. Free the result
 * with [`mapkit_string_free`].
 *
 * # Safety
 * Handles must be live and `out` valid.
 */
enum MapkitStatus mapkit_state_render(const struct MapkitTheory *theory,
                                      const struct MapkitState *state,
                                      bool json,
                                      char **out);

/**
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void mapkit_string_free(char *s);

/**
 * Library version, a static string.
 */
const char *mapkit_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MAPKIT_H */
