#ifndef TWISTOR_H
#define TWISTOR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TwStatus {
  TW_STATUS_OK = 0,
  /**
   * Unparseable input or unsupported sizes.
   */
  TW_STATUS_MALFORMED = 1,
  /**
   * Input violates a mathematical precondition.
   */
  TW_STATUS_DOMAIN = 2,
  /**
   * An iterative solver did not converge.
   */
  TW_STATUS_NOT_CONVERGED = 3,
  TW_STATUS_NULL_POINTER = 4,
  TW_STATUS_PANIC = 5,
} TwStatus;

/**
 * The line of imaginary units of an embedded algebra.
 */
typedef struct TwLine TwLine;

/**
 * An embedded algebra with exact rational entries.
 */
typedef struct TwRep TwRep;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *tw_last_error_message(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not have been freed, or be null.
 */
void tw_string_free(char *s);

/**
 * Standard representation of H(epsilon) on R^{4n}; `k` is the nilpotent
 * rank for epsilon = 0 and is ignored (pass 0) otherwise.
 *
 * # Safety
 * `out` must be a valid pointer to write a handle to.
 */
enum TwStatus tw_rep_standard(int32_t epsilon, size_t n, size_t k, struct TwRep **out);

/**
 * Parses a representation from its JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum TwStatus tw_rep_from_json(const char *json, struct TwRep **out);

/**
 * # Safety
 * `rep` must be a valid handle and `out` a valid pointer.
 */
enum TwStatus tw_rep_to_json(const struct TwRep *rep, char **out);

/**
 * Writes epsilon and n of a representation.
 *
 * # Safety
 * `rep` must be a valid handle; out-pointers must be valid.
 */
enum TwStatus tw_rep_info(const struct TwRep *rep, int32_t *epsilon, size_t *n);

/**
 * # Safety
 * `rep` must come from this library and not have been freed, or be null.
 */
void tw_rep_free(struct TwRep *rep);

/**
 * The line of a representation; the representation is copied.
 *
 * # Safety
 * `rep` must be a valid handle and `out` a valid pointer.
 */
enum TwStatus tw_line_from_rep(const struct TwRep *rep, struct TwLine **out);

/**
 * The line through two complex structures given as matrix JSON.
 *
 * # Safety
 * Both strings must be NUL-terminated and `out` a valid pointer.
 */
enum TwStatus tw_line_through_json(const char *a, const char *b, struct TwLine **out);

/**
 * # Safety
 * `line` must be a valid handle and `out` a valid pointer.
 */
enum TwStatus tw_line_to_json(const struct TwLine *line, char **out);

/**
 * # Safety
 * `line` must come from this library and not have been freed, or be null.
 */
void tw_line_free(struct TwLine *line);

/**
 * Dimension of the classes of type (1,1) at every point of the line.
 *
 * # Safety
 * `line` must be a valid handle and `out` a valid pointer.
 */
enum TwStatus tw_hdg_dim(const struct TwLine *line, size_t *out);

/**
 * The closed-form dimension; `k` as in `tw_rep_standard`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum TwStatus tw_hdg_formula(int32_t epsilon, size_t n, size_t k, size_t *out);

/**
 * Runs the exact verification battery up to `n_max` and writes its JSON
 * report and whether every check passed.
 *
 * # Safety
 * Out-pointers must be valid.
 */
enum TwStatus tw_verify(size_t n_max, uint64_t seed, char **report, bool *all_pass);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TWISTOR_H */
