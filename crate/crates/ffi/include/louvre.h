#ifndef LOUVRE_H
#define LOUVRE_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LouvreScheme {
  LOUVRE_SCHEME_REGULAR = 0,
  LOUVRE_SCHEME_LOUVRE7 = 1,
  LOUVRE_SCHEME_LOUVRE8 = 2,
} LouvreScheme;

typedef enum LouvreStatus {
  LOUVRE_STATUS_OK = 0,
  LOUVRE_STATUS_NULL_POINTER = 1,
  LOUVRE_STATUS_INVALID_UTF8 = 2,
  LOUVRE_STATUS_PARSE = 3,
  LOUVRE_STATUS_INVALID_CODE = 4,
  LOUVRE_STATUS_SCHEDULE = 5,
  LOUVRE_STATUS_VERIFICATION = 6,
  LOUVRE_STATUS_ROUTING = 7,
  LOUVRE_STATUS_USAGE = 8,
  LOUVRE_STATUS_PANIC = 9,
} LouvreStatus;

typedef struct LouvreCode LouvreCode;

typedef struct LouvreSchedule LouvreSchedule;

/**
 * Averages as exact fractions.
 */
typedef struct LouvreMetrics {
  int64_t degree_num;
  int64_t degree_den;
  int64_t distance_num;
  int64_t distance_den;
  uint64_t couplers;
  int64_t max_length;
} LouvreMetrics;

typedef struct LouvreVerifyResult {
  bool passed;
  bool commutation_ok;
  bool syndromes_deterministic;
  bool single_fault_detection_ok;
  bool restoration_ok;
  bool logicals_preserved;
  uint64_t detectors;
  uint64_t logical_qubits;
} LouvreVerifyResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message on this thread, or null. Valid until the next call.
 */
const char *louvre_last_error(void);

/**
 * Parses a code file (`l=`, `m=`, `A=`, `B=` lines).
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum LouvreStatus louvre_code_parse(const char *text, struct LouvreCode **out);

/**
 * # Safety
 * `code` must come from `louvre_code_parse` and not be freed twice.
 */
void louvre_code_free(struct LouvreCode *code);

/**
 * Writes the number of data qubits and logical qubits.
 *
 * # Safety
 * `code` must be a live handle; `n` and `k` must be writable.
 */
enum LouvreStatus louvre_code_params(const struct LouvreCode *code, uint64_t *n, uint64_t *k);

/**
 * # Safety
 * `code` must be a live handle; `out` must be writable.
 */
enum LouvreStatus louvre_schedule_build(const struct LouvreCode *code,
                                        enum LouvreScheme scheme,
                                        struct LouvreSchedule **out);

/**
 * Parses an instruction table and checks it against `code`.
 *
 * # Safety
 * `code` must be a live handle, `table` NUL-terminated, `out` writable.
 */
enum LouvreStatus louvre_schedule_from_table(const struct LouvreCode *code,
                                             const char *table,
                                             struct LouvreSchedule **out);

/**
 * # Safety
 * `s` must come from a `louvre_schedule_*` constructor and not be freed twice.
 */
void louvre_schedule_free(struct LouvreSchedule *s);

/**
 * Instruction table text; free with `louvre_string_free`.
 *
 * # Safety
 * `s` must be a live handle; `out` must be writable.
 */
enum LouvreStatus louvre_schedule_table(const struct LouvreSchedule *s, char **out);

/**
 * # Safety
 * `p` must come from this library and not be freed twice.
 */
void louvre_string_free(char *p);

/**
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum LouvreStatus louvre_metrics(const struct LouvreCode *code,
                                 const struct LouvreSchedule *s,
                                 struct LouvreMetrics *out);

/**
 * Runs the verifier over `rounds` rounds (at least 2). A failed verdict is
 * reported through `out`, not the status.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum LouvreStatus louvre_verify(const struct LouvreCode *code,
                                const struct LouvreSchedule *s,
                                uint32_t rounds,
                                struct LouvreVerifyResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOUVRE_H */
