#ifndef HYPERQ_H
#define HYPERQ_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. The first four mirror the CLI exit codes.
typedef enum HyperqStatus {
  HYPERQ_STATUS_OK = 0,
  // The call succeeded but the report holds at least one failing check.
  HYPERQ_STATUS_CHECK_FAILED = 1,
  HYPERQ_STATUS_INVALID_INPUT = 2,
  HYPERQ_STATUS_UNSUPPORTED = 3,
  HYPERQ_STATUS_NULL_POINTER = 4,
  HYPERQ_STATUS_UNKNOWN_COMMAND = 5,
  HYPERQ_STATUS_INTERNAL = 6,
} HyperqStatus;

// A parsed input instance.
typedef struct HyperqInstance HyperqInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses an instance from JSON text (the same format the CLI reads).
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum HyperqStatus hyperq_instance_new(const char *json, struct HyperqInstance **out);

// # Safety
// `inst` must come from [`hyperq_instance_new`] or be null.
void hyperq_instance_free(struct HyperqInstance *inst);

// Number of columns `n` and rank `d` of the instance matrix.
//
// # Safety
// `inst` must be a live instance; `n` and `d` valid pointers.
enum HyperqStatus hyperq_instance_shape(const struct HyperqInstance *inst, size_t *n, size_t *d);

// Runs a subcommand and returns the report as JSON in `*out`
// (release it with [`hyperq_string_free`]). A report is produced even
// when checks fail; the status is then `CheckFailed`.
//
// # Safety
// `inst` must be a live instance, `command` a NUL-terminated string and
// `out` a valid pointer.
enum HyperqStatus hyperq_run(const struct HyperqInstance *inst,
                             const char *command,
                             bool exact,
                             char **out);

// # Safety
// `s` must come from this library or be null.
void hyperq_string_free(char *s);

// Message for the last failing call on this thread, or null. The pointer
// stays valid until the next call into the library on this thread.
const char *hyperq_last_error(void);

// Library version, statically allocated.
const char *hyperq_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYPERQ_H */
