#ifndef STEREO_DECORR_H
#define STEREO_DECORR_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SdStatus {
  SD_STATUS_OK = 0,
  SD_STATUS_NULL_POINTER = 1,
  SD_STATUS_INVALID_CONFIG = 2,
  SD_STATUS_IO = 3,
  SD_STATUS_NUMERIC = 4,
  SD_STATUS_INSUFFICIENT_DATA = 5,
  SD_STATUS_PANIC = 6,
} SdStatus;

/**
 * Streaming single-channel processor.
 */
typedef struct SdDecorrelator SdDecorrelator;

/**
 * SCAL parameters. Obtain defaults from [`sd_scal_default_params`].
 */
typedef struct SdScalParams {
  double beta;
  uint32_t n_min;
  uint32_t n_max;
  double r_max;
  double epsilon;
  uint32_t window_length;
  /**
   * Nonzero to follow the filter with masked-noise injection.
   */
  int with_noise;
} SdScalParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *sd_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sd_version(void);

struct SdScalParams sd_scal_default_params(void);

/**
 * Creates a SCAL processor for channel `channel` of a stream seeded with
 * `seed`.
 *
 * # Safety
 * `params` must point to a valid [`SdScalParams`]; `out` must be writable.
 */
enum SdStatus sd_decorrelator_new_scal(const struct SdScalParams *params,
                                       uint32_t sample_rate,
                                       uint64_t seed,
                                       uint32_t channel,
                                       struct SdDecorrelator **out);

/**
 * Creates any processor from its JSON description (the `method`-tagged
 * format accepted by the command-line tool).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum SdStatus sd_decorrelator_new_from_json(const char *json,
                                            uint32_t sample_rate,
                                            uint64_t seed,
                                            uint32_t channel,
                                            struct SdDecorrelator **out);

/**
 * Processes `len` samples. `input` and `output` may be the same buffer.
 *
 * # Safety
 * `handle` must come from `sd_decorrelator_new_*`; both buffers must hold
 * `len` floats.
 */
enum SdStatus sd_decorrelator_process(struct SdDecorrelator *handle,
                                      const float *input,
                                      float *output,
                                      size_t len);

/**
 * Double-precision variant of [`sd_decorrelator_process`]. The buffers
 * must not overlap.
 *
 * # Safety
 * As for [`sd_decorrelator_process`].
 */
enum SdStatus sd_decorrelator_process_f64(struct SdDecorrelator *handle,
                                          const double *input,
                                          double *output,
                                          size_t len);

/**
 * Nominal delay of the processor in samples; 0 for a null handle.
 *
 * # Safety
 * `handle` must be null or come from `sd_decorrelator_new_*`.
 */
uint32_t sd_decorrelator_latency(const struct SdDecorrelator *handle);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `handle` must be null or come from `sd_decorrelator_new_*`, and must not
 * be used afterwards.
 */
void sd_decorrelator_free(struct SdDecorrelator *handle);

/**
 * Squared coherence of two signals, `fft_size / 2 + 1` bins written to
 * `gamma_sq`. `n_blocks_out` (may be null) receives the number of
 * averaged blocks.
 *
 * # Safety
 * `x1` and `x2` must hold `len` doubles; `gamma_sq` must hold `gamma_len`.
 */
enum SdStatus sd_coherence(const double *x1,
                           const double *x2,
                           size_t len,
                           uint32_t sample_rate,
                           uint32_t fft_size,
                           double *gamma_sq,
                           size_t gamma_len,
                           uint32_t *n_blocks_out);

/**
 * Mean squared coherence between `f_lo` and `f_hi` Hz.
 *
 * # Safety
 * `x1` and `x2` must hold `len` doubles; `out` must be writable.
 */
enum SdStatus sd_band_coherence(const double *x1,
                                const double *x2,
                                size_t len,
                                uint32_t sample_rate,
                                uint32_t fft_size,
                                double f_lo,
                                double f_hi,
                                double *out);

/**
 * Normalized misalignment in dB between a true and an estimated response.
 *
 * # Safety
 * `h_true` and `h_est` must hold `len` doubles; `out` must be writable.
 */
enum SdStatus sd_misalignment_db(const double *h_true,
                                 const double *h_est,
                                 size_t len,
                                 double *out);

/**
 * 1 if `|alpha|(1 + |beta|) < 1`, else 0.
 */
int sd_check_stability(double alpha, double beta);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STEREO_DECORR_H */
