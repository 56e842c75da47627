#ifndef QRESERVOIR_H
#define QRESERVOIR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum QrStatus {
  QR_STATUS_OK = 0,
  QR_STATUS_NULL_POINTER = 1,
  QR_STATUS_INVALID_ARGUMENT = 2,
  QR_STATUS_DIMENSION = 3,
  QR_STATUS_NUMERIC = 4,
  QR_STATUS_IO = 5,
  QR_STATUS_PARSE = 6,
  QR_STATUS_CAPACITY = 7,
  QR_STATUS_PANIC = 8,
} QrStatus;

/**
 * Per-timestep feature rows.
 */
typedef struct QrFeatures QrFeatures;

/**
 * Device noise profile.
 */
typedef struct QrNoiseProfile QrNoiseProfile;

/**
 * Configured reservoir.
 */
typedef struct QrReservoir QrReservoir;

/**
 * Trained linear readout.
 */
typedef struct QrWeights QrWeights;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Owned by the
 * library and valid until the next failing call on the same thread.
 */
const char *qr_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *qr_version(void);

/**
 * Releases a string returned by the library.
 */
void qr_string_free(char *s);

/**
 * `spec` is a profile file path or `preset:<name>`; presets are sized to `num_qubits`.
 */
enum QrStatus qr_profile_load(const char *spec, size_t num_qubits, struct QrNoiseProfile **out);

void qr_profile_free(struct QrNoiseProfile *profile);

/**
 * Adjacent-pair reservoir on `num_qubits` qubits. `shots == 0` selects exact
 * expectations. A null `profile` means noiseless.
 */
enum QrStatus qr_reservoir_new(size_t num_qubits,
                               double scale,
                               const struct QrNoiseProfile *profile,
                               uint64_t shots,
                               uint64_t seed,
                               struct QrReservoir **out);

void qr_reservoir_free(struct QrReservoir *reservoir);

/**
 * Drives the reservoir from `|+⟩` over `inputs[0..len]`.
 */
enum QrStatus qr_reservoir_run(const struct QrReservoir *reservoir,
                               const double *inputs,
                               size_t len,
                               struct QrFeatures **out);

size_t qr_features_timesteps(const struct QrFeatures *features);

size_t qr_features_width(const struct QrFeatures *features);

/**
 * Copies the row-major `timesteps × width` values into `buf`.
 */
enum QrStatus qr_features_copy(const struct QrFeatures *features, double *buf, size_t len);

void qr_features_free(struct QrFeatures *features);

/**
 * Fits on feature rows `first..=last` (1-based) against `targets`, which
 * must have one entry per timestep of `features`.
 */
enum QrStatus qr_fit_regression(const struct QrFeatures *features,
                                const double *targets,
                                size_t len,
                                size_t first,
                                size_t last,
                                struct QrWeights **out);

/**
 * Writes one prediction per timestep of `features` into `buf`.
 */
enum QrStatus qr_predict(const struct QrWeights *weights,
                         const struct QrFeatures *features,
                         double *buf,
                         size_t len);

void qr_weights_free(struct QrWeights *weights);

/**
 * Triple-sine input with the given parameters; `len` samples from `t = origin`.
 */
enum QrStatus qr_gen_input(double alpha_bar,
                           double beta_bar,
                           double gamma_bar,
                           double period,
                           double amplitude,
                           int64_t origin,
                           double *buf,
                           size_t len);

/**
 * NARMA targets for `inputs`; `order == 2` selects the NARMA2 recurrence.
 */
enum QrStatus qr_gen_narma(size_t order, const double *inputs, size_t len, double *buf);

/**
 * NMSE over the 1-based window `first..=last`.
 */
enum QrStatus qr_nmse(const double *predictions,
                      const double *targets,
                      size_t len,
                      size_t first,
                      size_t last,
                      double *out);

/**
 * OpenQASM 2.0 program for `inputs` on an adjacent-pair layout. Release the
 * string with [`qr_string_free`].
 */
enum QrStatus qr_export_qasm(const double *inputs,
                             size_t len,
                             size_t num_qubits,
                             double scale,
                             char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QRESERVOIR_H */
