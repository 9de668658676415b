#ifndef TRAINREC_H
#define TRAINREC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum TrainrecStatus {
  TRAINREC_STATUS_OK = 0,
  TRAINREC_STATUS_NULL_POINTER = 1,
  TRAINREC_STATUS_INVALID_ARGUMENT = 2,
  TRAINREC_STATUS_INVALID_UTF8 = 3,
  TRAINREC_STATUS_PARSE = 4,
  TRAINREC_STATUS_CURVE_FAILED = 5,
  TRAINREC_STATUS_DENSITY_FAILED = 6,
  TRAINREC_STATUS_OFFSET_FAILED = 7,
  TRAINREC_STATUS_ASSEMBLY_FAILED = 8,
  TRAINREC_STATUS_BUFFER_TOO_SMALL = 9,
  TRAINREC_STATUS_PANIC = 10,
} TrainrecStatus;

typedef enum TrainrecNoise {
  TRAINREC_NOISE_GAUSSIAN = 0,
  TRAINREC_NOISE_UNIFORM_BALL = 1,
} TrainrecNoise;

typedef enum TrainrecOrientation {
  TRAINREC_ORIENTATION_FORWARD = 0,
  TRAINREC_ORIENTATION_REVERSED = 1,
} TrainrecOrientation;

/*
 A cloud of sample trains.
 */
typedef struct TrainrecCloud TrainrecCloud;

/*
 A finished reconstruction.
 */
typedef struct TrainrecResult TrainrecResult;

/*
 A periodic signal.
 */
typedef struct TrainrecSignal TrainrecSignal;

/*
 Reconstruction tuning. Start from [`trainrec_options_default`].
 */
typedef struct TrainrecOptions {
  size_t warp_grid;
  size_t scan_points;
  size_t quadrature_points;
  size_t output_resolution;
  size_t min_points;
  size_t denoise_iterations;
  size_t max_improvement_passes;
} TrainrecOptions;

typedef struct TrainrecErrorReport {
  double eps_t;
  double eps_2;
  double eps_inf;
  double best_shift;
} TrainrecErrorReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version, a static string.
 */
const char *trainrec_version(void);

/*
 Message of the last failed call on this thread, or NULL. Valid until the
 next call into the library from this thread.
 */
const char *trainrec_last_error(void);

/*
 Frees a string returned by the library. NULL is ignored.

 # Safety
 `s` must come from this library and not have been freed.
 */
void trainrec_string_free(char *s);

struct TrainrecOptions trainrec_options_default(void);

/*
 Parses a signal JSON document.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum TrainrecStatus trainrec_signal_from_json(const char *json, struct TrainrecSignal **out);

/*
 The built-in chirp-like test signal.

 # Safety
 `out` must be writable.
 */
enum TrainrecStatus trainrec_signal_chirp(double period, struct TrainrecSignal **out);

/*
 `amplitude · sin(2πt/period)`.

 # Safety
 `out` must be writable.
 */
enum TrainrecStatus trainrec_signal_sine(double period,
                                         double amplitude,
                                         struct TrainrecSignal **out);

/*
 A signal given by `len` uniform samples over one period.

 # Safety
 `samples` must point to `len` doubles; `out` must be writable.
 */
enum TrainrecStatus trainrec_signal_table(double period,
                                          const double *samples,
                                          size_t len,
                                          struct TrainrecSignal **out);

/*
 # Safety
 `signal` must be a live handle; `out` must be writable.
 */
enum TrainrecStatus trainrec_signal_evaluate(const struct TrainrecSignal *signal,
                                             double t,
                                             double *out);

/*
 # Safety
 `signal` must be a live handle; `out` must be writable.
 */
enum TrainrecStatus trainrec_signal_period(const struct TrainrecSignal *signal, double *out);

/*
 Serializes the signal; free the string with [`trainrec_string_free`].

 # Safety
 `signal` must be a live handle; `out` must be writable.
 */
enum TrainrecStatus trainrec_signal_to_json(const struct TrainrecSignal *signal, char **out);

/*
 # Safety
 `signal` must come from this library and not have been freed. NULL is ignored.
 */
void trainrec_signal_free(struct TrainrecSignal *signal);

/*
 Draws `n` noisy trains of length `d` at spacing `tau`. `delta` is the
 quantization step, 0 for none.

 # Safety
 `signal` must be a live handle; `out` must be writable.
 */
enum TrainrecStatus trainrec_cloud_sample(const struct TrainrecSignal *signal,
                                          double tau,
                                          size_t d,
                                          size_t n,
                                          double sigma,
                                          enum TrainrecNoise noise,
                                          double delta,
                                          uint64_t seed,
                                          struct TrainrecCloud **out);

/*
 A cloud from `n` row-major points of dimension `d`.

 # Safety
 `coords` must point to `n * d` doubles; `out` must be writable.
 */
enum TrainrecStatus trainrec_cloud_from_points(const double *coords,
                                               size_t n,
                                               size_t d,
                                               double tau,
                                               struct TrainrecCloud **out);

/*
 # Safety
 `cloud` must be a live handle; `n` and `d` must be writable.
 */
enum TrainrecStatus trainrec_cloud_shape(const struct TrainrecCloud *cloud, size_t *n, size_t *d);

/*
 Copies the row-major coordinates into `buf`, which must hold `n * d` values.

 # Safety
 `cloud` must be a live handle; `buf` must point to `len` writable doubles.
 */
enum TrainrecStatus trainrec_cloud_coords(const struct TrainrecCloud *cloud,
                                          double *buf,
                                          size_t len);

/*
 # Safety
 `cloud` must come from this library and not have been freed. NULL is ignored.
 */
void trainrec_cloud_free(struct TrainrecCloud *cloud);

/*
 Reconstructs period and waveform. `options` may be NULL for defaults.

 # Safety
 `cloud` must be a live handle; `options` NULL or valid; `out` writable.
 */
enum TrainrecStatus trainrec_reconstruct(const struct TrainrecCloud *cloud,
                                         double radius,
                                         const struct TrainrecOptions *options,
                                         struct TrainrecResult **out);

/*
 # Safety
 `result` must be a live handle; `out` must be writable.
 */
enum TrainrecStatus trainrec_result_period(const struct TrainrecResult *result, double *out);

/*
 # Safety
 `result` must be a live handle; `out` must be writable.
 */
enum TrainrecStatus trainrec_result_offset(const struct TrainrecResult *result, double *out);

/*
 # Safety
 `result` must be a live handle; `out` must be writable.
 */
enum TrainrecStatus trainrec_result_orientation(const struct TrainrecResult *result,
                                                enum TrainrecOrientation *out);

/*
 A new signal handle holding the reconstructed waveform.

 # Safety
 `result` must be a live handle; `out` must be writable.
 */
enum TrainrecStatus trainrec_result_signal(const struct TrainrecResult *result,
                                           struct TrainrecSignal **out);

/*
 The full result document as JSON; free with [`trainrec_string_free`].

 # Safety
 `result` must be a live handle; `out` must be writable.
 */
enum TrainrecStatus trainrec_result_to_json(const struct TrainrecResult *result, char **out);

/*
 # Safety
 `result` must come from this library and not have been freed. NULL is ignored.
 */
void trainrec_result_free(struct TrainrecResult *result);

/*
 Period error and shift-minimized RMS and sup errors of `estimate`
 against `reference`. `shift_grid` is the size of the shift lattice.

 # Safety
 Both handles must be live; `out` must be writable.
 */
enum TrainrecStatus trainrec_evaluate(const struct TrainrecSignal *reference,
                                      const struct TrainrecSignal *estimate,
                                      size_t shift_grid,
                                      struct TrainrecErrorReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRAINREC_H */
