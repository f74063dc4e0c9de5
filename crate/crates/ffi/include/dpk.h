#ifndef DPK_H
#define DPK_H

/* Generated by cbindgen from the dpk-ffi crate; do not edit by hand. */

#include <stdint.h>
#include <stddef.h>

// Status codes returned by every fallible entry point.
typedef enum DpkStatus {
  DPK_STATUS_OK = 0,
  DPK_STATUS_NULL_POINTER = 1,
  DPK_STATUS_INVALID_ARGUMENT = 2,
  DPK_STATUS_UNKNOWN_SYMBOL = 3,
  DPK_STATUS_DUPLICATE_OBSERVATION = 4,
  DPK_STATUS_NULL_BLOCK = 5,
  DPK_STATUS_BUDGET_EXCEEDED = 6,
  DPK_STATUS_SPACE_MISMATCH = 7,
  DPK_STATUS_INVALID_CONFIG = 8,
  DPK_STATUS_ENGINE_ERROR = 9,
} DpkStatus;

// Completed credal run, with the distance-to-final column precomputed.
typedef struct DipkRun DipkRun;

// Probability measure handle, bound to the space of the model that built it.
typedef struct DpkMeasure DpkMeasure;

// Observation model handle: an indexed state space plus the symbol range,
// pmf, and preimages.
typedef struct DpkModel DpkModel;

// Completed precise run.
typedef struct DpkRun DpkRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the message of the last failing call on this thread into `buf`
// (truncated, always NUL-terminated) and returns the full message length in
// bytes, or 0 when no error is recorded.
//
// # Safety
// `buf` must point to `cap` writable bytes, or be null (then only the
// length is reported).
uintptr_t dpk_last_error_message(char *buf, uintptr_t cap);

// Builds an observation model over `n_atoms` indexed atoms.
//
// `pmf` has one strictly positive entry per symbol and sums to one.
// Preimages are supplied flattened: `preimage_offsets` has `n_symbols + 1`
// entries delimiting each symbol's atom indices inside `preimage_atoms`.
//
// # Safety
// The array arguments must match the advertised lengths, and `out` must be
// a valid pointer.
enum DpkStatus dpk_model_new(uintptr_t n_atoms,
                             uintptr_t n_symbols,
                             const double *pmf,
                             const uintptr_t *preimage_offsets,
                             const uint32_t *preimage_atoms,
                             struct DpkModel **out);

// # Safety
// `model` must be a pointer from [`dpk_model_new`], not yet freed.
void dpk_model_free(struct DpkModel *model);

// Builds a measure on the model's space from `n` masses.
//
// # Safety
// `model` must be a live model handle, `masses` must hold `n` doubles, and
// `out` must be valid.
enum DpkStatus dpk_measure_new(const struct DpkModel *model,
                               const double *masses,
                               uintptr_t n,
                               struct DpkMeasure **out);

// # Safety
// `measure` must be a pointer from a `*_new`/accessor call, not yet freed.
void dpk_measure_free(struct DpkMeasure *measure);

// Probability of the event spanned by `atoms`.
//
// # Safety
// `measure` must be live, `atoms` must hold `n` indices, `out` must be
// valid.
enum DpkStatus dpk_measure_prob(const struct DpkMeasure *measure,
                                const uint32_t *atoms,
                                uintptr_t n,
                                double *out);

// Runs a precise update over a schedule of symbol-index batches.
// Nonpositive `tolerance` selects the default (1e-10).
//
// # Safety
// `model`, `prior`, and `out` must be live pointers; the schedule arrays
// must match the offsets contract described at the top of the header.
enum DpkStatus dpk_run_new(const struct DpkModel *model,
                           const struct DpkMeasure *prior,
                           const uint32_t *symbols,
                           const uintptr_t *batch_offsets,
                           uintptr_t n_batches,
                           double tolerance,
                           struct DpkRun **out);

// Number of recorded states (the prior counts as state 0).
//
// # Safety
// `run` must be a live run handle.
uintptr_t dpk_run_len(const struct DpkRun *run);

// Stop reason: 0 terminal, 1 tolerance, 2 budget; -1 on null handle.
//
// # Safety
// `run` must be a live run handle or null.
int32_t dpk_run_stop_reason(const struct DpkRun *run);

// Total-variation distance of step `step` (1-based, up to `len - 1`).
//
// # Safety
// `run` and `out` must be live pointers.
enum DpkStatus dpk_run_tv_step(const struct DpkRun *run, uintptr_t step, double *out);

// Copies the measure recorded at `step` (0 = prior) into a fresh handle.
//
// # Safety
// `run` and `out` must be live pointers; the result must be released with
// [`dpk_measure_free`].
enum DpkStatus dpk_run_measure(const struct DpkRun *run, uintptr_t step, struct DpkMeasure **out);

// # Safety
// `run` must be a pointer from [`dpk_run_new`], not yet freed.
void dpk_run_free(struct DpkRun *run);

// Runs a credal update over a schedule. `generators` is row-major,
// `k` rows of `n_atoms` masses each.
//
// # Safety
// Pointer arguments must be live and sized as documented.
enum DpkStatus dipk_run_new(const struct DpkModel *model,
                            const double *generators,
                            uintptr_t k,
                            const uint32_t *symbols,
                            const uintptr_t *batch_offsets,
                            uintptr_t n_batches,
                            double tolerance,
                            struct DipkRun **out);

// # Safety
// `run` must be a live credal run handle.
uintptr_t dipk_run_len(const struct DipkRun *run);

// Stop reason: 0 terminal, 1 tolerance, 2 budget; -1 on null handle.
//
// # Safety
// `run` must be a live credal run handle or null.
int32_t dipk_run_stop_reason(const struct DipkRun *run);

// Lower envelope of the event spanned by `atoms` at `step`.
//
// # Safety
// Pointer arguments must be live and sized as documented.
enum DpkStatus dipk_run_lower(const struct DipkRun *run,
                              uintptr_t step,
                              const uint32_t *atoms,
                              uintptr_t n,
                              double *out);

// Upper envelope of the event spanned by `atoms` at `step`.
//
// # Safety
// Pointer arguments must be live and sized as documented.
enum DpkStatus dipk_run_upper(const struct DipkRun *run,
                              uintptr_t step,
                              const uint32_t *atoms,
                              uintptr_t n,
                              double *out);

// Hausdorff distance from the set at `step` to the final set.
//
// # Safety
// `run` and `out` must be live pointers.
enum DpkStatus dipk_run_hausdorff_to_final(const struct DipkRun *run, uintptr_t step, double *out);

// # Safety
// `run` must be a pointer from [`dipk_run_new`], not yet freed.
void dipk_run_free(struct DipkRun *run);

// One-call driver: parses a session config (JSON) and a stream (one batch
// of symbol tokens per line), runs the precise (`credal == 0`) or credal
// engine, and returns the JSON report as a fresh string to be released
// with [`dpk_string_free`]. `seed < 0` disables the self-checks.
//
// # Safety
// `config_json` and `stream_text` must be NUL-terminated strings; `out_json`
// must be a valid pointer.
enum DpkStatus dpk_run_report_json(const char *config_json,
                                   const char *stream_text,
                                   int32_t credal,
                                   int64_t seed,
                                   char **out_json);

// Releases a string returned by [`dpk_run_report_json`].
//
// # Safety
// `s` must be a pointer previously returned by this library, not yet freed.
void dpk_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DPK_H */
