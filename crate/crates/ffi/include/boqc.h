// Copyright 2026 The boqc Developers
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except
// in compliance with the License. You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under
// the License.


#ifndef BOQC_H
#define BOQC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BoqcStatus {
  BOQC_STATUS_OK = 0,
  BOQC_STATUS_NULL_ARGUMENT = 1,
  BOQC_STATUS_INVALID_UTF8 = 2,
  // Malformed file, schema mismatch or failed validation.
  BOQC_STATUS_PARSE_ERROR = 3,
  BOQC_STATUS_INVALID_ARGUMENT = 4,
  // Ran, but the success threshold was missed.
  BOQC_STATUS_VERIFICATION_FAILED = 5,
  BOQC_STATUS_BUFFER_TOO_SMALL = 6,
  BOQC_STATUS_INTERNAL = 7,
} BoqcStatus;

// A parsed network file.
typedef struct BoqcNetwork BoqcNetwork;

// A parsed pattern file.
typedef struct BoqcPattern BoqcPattern;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until the next failing call.
const char *boqc_last_error(void);

// Library version as a static string.
const char *boqc_version(void);

// Final-round diffusion phase ψ for a database of `n_items` entries.
//
// # Safety
// `out` must be null or point to writable memory for one `double`.
enum BoqcStatus boqc_hoyer_psi(size_t n_items, double *out);

// Parses a pattern file.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must point to writable memory for one pointer.
enum BoqcStatus boqc_pattern_from_json(const char *json, struct BoqcPattern **out);

// Loads a shipped pattern fixture by name (`fig4`, `fig5`).
//
// # Safety
// As for [`boqc_pattern_from_json`].
enum BoqcStatus boqc_pattern_fixture(const char *name, struct BoqcPattern **out);

// Releases a pattern handle; null is ignored.
//
// # Safety
// `p` must be null or a handle from this library not yet freed.
void boqc_pattern_free(struct BoqcPattern *p);

// Number of output qubits; readout values lie in `[0, 2^outputs)`.
//
// # Safety
// `p` must be a live handle; `out` must point to writable memory for one `size_t`.
enum BoqcStatus boqc_pattern_outputs(const struct BoqcPattern *p, size_t *out);

// Samples `shots` readouts for item `tau` (negative for a pattern without overlays) and writes
// the histogram into `counts[0..2^outputs]`.
//
// # Safety
// `p` must be a live handle; `counts` must point to `counts_len` writable `uint64_t`.
enum BoqcStatus boqc_pattern_run(const struct BoqcPattern *p,
                                 int64_t tau,
                                 size_t shots,
                                 uint64_t seed,
                                 uint64_t *counts,
                                 size_t counts_len);

// Smallest per-item success probability; `VerificationFailed` below the threshold.
//
// # Safety
// `p` must be a live handle; `min_success` null or writable for one `double`.
enum BoqcStatus boqc_pattern_verify(const struct BoqcPattern *p,
                                    uint64_t seed,
                                    double *min_success);

// NV-center timing estimate of the pattern's measurement order, in milliseconds.
//
// # Safety
// `p` must be a live handle; each out-pointer null or writable for one `double`.
enum BoqcStatus boqc_pattern_estimate(const struct BoqcPattern *p,
                                      double *total_ms,
                                      double *mean_idle_ms);

// Parses a network file.
//
// # Safety
// As for [`boqc_pattern_from_json`].
enum BoqcStatus boqc_network_from_json(const char *json, struct BoqcNetwork **out);

// Releases a network handle; null is ignored.
//
// # Safety
// `n` must be null or a handle from this library not yet freed.
void boqc_network_free(struct BoqcNetwork *n);

// Smallest success probability over items (pipelines) or columns (single blocks).
//
// # Safety
// `n` must be a live handle; `min_success` null or writable for one `double`.
enum BoqcStatus boqc_network_verify(const struct BoqcNetwork *n, double *min_success);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOQC_H */
