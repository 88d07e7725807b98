#ifndef FANIH_H
#define FANIH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Success.
 */
#define FANIH_OK 0

/**
 * A mathematical assertion failed (a check reported a counterexample).
 */
#define FANIH_ERR_ASSERT 1

/**
 * Invalid input: malformed document, geometric axiom violation, bad cap.
 */
#define FANIH_ERR_INPUT 2

/**
 * A required pointer argument was null.
 */
#define FANIH_ERR_NULL 3

/**
 * An input string was not valid UTF-8.
 */
#define FANIH_ERR_UTF8 4

/**
 * An internal panic was caught; the library state is still usable.
 */
#define FANIH_ERR_PANIC 5

/**
 * An immutable fan handle; create with `fanih_fan_parse`, release with
 * `fanih_fan_free`.
 */
typedef struct FanihFan FanihFan;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread; do not free it.
 */
const char *fanih_last_error_message(void);

/**
 * Parse a fan-document ({"dim": …, "rays": […], "max_cones": […]}) and
 * store a handle in `out`. On failure `out` is untouched.
 *
 * # Safety
 * `json` must be null or a valid NUL-terminated string; `out` must be null
 * or valid for writes.
 */
int32_t fanih_fan_parse(const char *json, struct FanihFan **out);

/**
 * Release a fan handle. Null is a no-op.
 *
 * # Safety
 * `fan` must be null or a pointer obtained from `fanih_fan_parse` that has
 * not been freed yet.
 */
void fanih_fan_free(struct FanihFan *fan);

/**
 * Number of cones in the fan, the origin included.
 *
 * # Safety
 * `fan` must be a live handle; `out` must be valid for writes.
 */
int32_t fanih_fan_cone_count(const struct FanihFan *fan, uintptr_t *out);

/**
 * Intersection cohomology of the fan as JSON {"ih": {"degree": dim, …}}.
 * `cap` <= 0 selects the default; otherwise it must be even and >= 2.
 * The returned string is owned by the caller: free it with
 * `fanih_string_free`.
 *
 * # Safety
 * `fan` must be a live handle; `out` must be valid for writes.
 */
int32_t fanih_ih_json(const struct FanihFan *fan, int64_t cap, char **out);

/**
 * Run the full invariant suite and return its JSON report (schema
 * {"ih": …, "checks": [{"name", "pass", "witness"}, …]}). Returns
 * FANIH_ERR_ASSERT when some check fails; the report is still written.
 *
 * # Safety
 * `fan` must be a live handle; `out` must be valid for writes.
 */
int32_t fanih_check_json(const struct FanihFan *fan, int64_t cap, char **out);

/**
 * Free a string returned by this library. Null is a no-op.
 *
 * # Safety
 * `s` must be null or a string returned by this library that has not been
 * freed yet.
 */
void fanih_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* FANIH_H */
