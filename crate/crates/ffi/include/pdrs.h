#ifndef PDRS_H
#define PDRS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every fallible call.
 */
typedef enum PdrsStatus {
  PDRS_STATUS_OK = 0,
  PDRS_STATUS_NULL_POINTER = 1,
  PDRS_STATUS_INVALID_ARGUMENT = 2,
  PDRS_STATUS_NUMERICAL = 3,
  PDRS_STATUS_FORMAT = 4,
  PDRS_STATUS_CONFIG = 5,
  PDRS_STATUS_IO = 6,
  PDRS_STATUS_BUFFER_TOO_SMALL = 7,
  PDRS_STATUS_PANIC = 8,
} PdrsStatus;

/**
 * Detector selector for [`pdrs_detect`].
 */
typedef enum PdrsDetector {
  PDRS_DETECTOR_PDRS = 0,
  PDRS_DETECTOR_BOMP = 1,
  PDRS_DETECTOR_FPR = 2,
  PDRS_DETECTOR_ORACLE = 3,
} PdrsDetector;

/**
 * System configuration.
 */
typedef struct PdrsConfig PdrsConfig;

/**
 * Pilot pool and PDRS codebook of one configuration.
 */
typedef struct PdrsContext PdrsContext;

/**
 * One received frame together with the pool and codebook it was built from.
 */
typedef struct PdrsFrame PdrsFrame;

/**
 * Output of a detector.
 */
typedef struct PdrsResult PdrsResult;

/**
 * Dimensions of a frame.
 */
typedef struct PdrsFrameDims {
  size_t antennas;
  size_t pool_size;
  size_t pilot_len;
  size_t pdrs_len;
  size_t data_len;
  size_t active_users;
} PdrsFrameDims;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *pdrs_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pdrs_version(void);

/**
 * Large-scale default configuration (M=128, N=1000, L=96, l=4, K=ζ=96, 4 dB).
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum PdrsStatus pdrs_config_new_default(struct PdrsConfig **out);

/**
 * Noiseless small configuration with `ζ = K`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum PdrsStatus pdrs_config_new_small(size_t antennas,
                                      size_t pool_size,
                                      size_t pilot_len,
                                      size_t active_users,
                                      struct PdrsConfig **out);

/**
 * Parses `key = value` configuration text.
 *
 * # Safety
 * `text` must be NUL-terminated; `out` must be valid for writes.
 */
enum PdrsStatus pdrs_config_from_text(const char *text, struct PdrsConfig **out);

/**
 * SNR in dB; `INFINITY` means noiseless. The config is unchanged on failure.
 *
 * # Safety
 * `cfg` must be a live handle from `pdrs_config_*`.
 */
enum PdrsStatus pdrs_config_set_snr_db(struct PdrsConfig *cfg, double snr_db);

/**
 * PDRS length `l`.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum PdrsStatus pdrs_config_set_pdrs_len(struct PdrsConfig *cfg, size_t pdrs_len);

/**
 * Sets `ζ = round(α·K)`.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum PdrsStatus pdrs_config_set_alpha(struct PdrsConfig *cfg, double alpha);

/**
 * # Safety
 * `cfg` must be a live handle.
 */
enum PdrsStatus pdrs_config_set_seed(struct PdrsConfig *cfg, uint64_t seed);

/**
 * Number of data symbols `D` per frame.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum PdrsStatus pdrs_config_set_data_len(struct PdrsConfig *cfg, size_t data_len);

/**
 * Current `ζ`.
 *
 * # Safety
 * `cfg` must be a live handle; `zeta` must be valid for writes.
 */
enum PdrsStatus pdrs_config_zeta(const struct PdrsConfig *cfg, size_t *zeta);

/**
 * # Safety
 * `cfg` must be null or a live handle not used afterwards.
 */
void pdrs_config_free(struct PdrsConfig *cfg);

/**
 * Draws the pilot pool and codebook of `cfg`.
 *
 * # Safety
 * `cfg` must be a live handle; `out` must be valid for writes.
 */
enum PdrsStatus pdrs_context_new(const struct PdrsConfig *cfg, struct PdrsContext **out);

/**
 * # Safety
 * `ctx` must be null or a live handle not used afterwards.
 */
void pdrs_context_free(struct PdrsContext *ctx);

/**
 * Frame of trial `trial_index`; identical to the simulator's trial.
 *
 * # Safety
 * `ctx` must be a live handle; `out` must be valid for writes.
 */
enum PdrsStatus pdrs_frame_generate(const struct PdrsContext *ctx,
                                    uint64_t trial_index,
                                    struct PdrsFrame **out);

/**
 * Reads a frame file.
 *
 * # Safety
 * `path` must be NUL-terminated; `out` must be valid for writes.
 */
enum PdrsStatus pdrs_frame_read(const char *path, struct PdrsFrame **out);

/**
 * Writes a frame file.
 *
 * # Safety
 * `frame` must be a live handle; `path` must be NUL-terminated.
 */
enum PdrsStatus pdrs_frame_write(const struct PdrsFrame *frame, const char *path);

/**
 * # Safety
 * `frame` must be a live handle; `dims` must be valid for writes.
 */
enum PdrsStatus pdrs_frame_dims(const struct PdrsFrame *frame, struct PdrsFrameDims *dims);

/**
 * Ground-truth active indices, ascending.
 *
 * # Safety
 * `frame` must be a live handle; `buf` must hold `cap` entries.
 */
enum PdrsStatus pdrs_frame_active(const struct PdrsFrame *frame,
                                  size_t *buf,
                                  size_t cap,
                                  size_t *written);

/**
 * # Safety
 * `frame` must be null or a live handle not used afterwards.
 */
void pdrs_frame_free(struct PdrsFrame *frame);

/**
 * Runs a detector with support size `zeta`.
 *
 * # Safety
 * `frame` must be a live handle; `out` must be valid for writes.
 */
enum PdrsStatus pdrs_detect(const struct PdrsFrame *frame,
                            enum PdrsDetector detector,
                            size_t zeta,
                            struct PdrsResult **out);

/**
 * Detected indices, best first.
 *
 * # Safety
 * `res` must be a live handle; `buf` must hold `cap` entries.
 */
enum PdrsStatus pdrs_result_support(const struct PdrsResult *res,
                                    size_t *buf,
                                    size_t cap,
                                    size_t *written);

/**
 * Score of each support entry.
 *
 * # Safety
 * `res` must be a live handle; `buf` must hold `cap` entries.
 */
enum PdrsStatus pdrs_result_scores(const struct PdrsResult *res,
                                   double *buf,
                                   size_t cap,
                                   size_t *written);

/**
 * Complex and real multiplications spent by the detector.
 *
 * # Safety
 * `res` must be a live handle; output pointers must be valid for writes.
 */
enum PdrsStatus pdrs_result_mults(const struct PdrsResult *res, uint64_t *complex, uint64_t *real);

/**
 * # Safety
 * `res` must be null or a live handle not used afterwards.
 */
void pdrs_result_free(struct PdrsResult *res);

/**
 * Runs the pseudo-inverse and combining-equivalence suites. `iterations == 0`
 * and `tol <= 0` select the defaults.
 *
 * # Safety
 * `all_passed` must be valid for writes.
 */
enum PdrsStatus pdrs_lemma_check(size_t iterations, double tol, uint64_t seed, bool *all_passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PDRS_H */
