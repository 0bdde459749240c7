/* C API of the single-photon entanglement simulator. */

#ifndef SPE_H
#define SPE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code of every fallible API call.
typedef enum SpeStatus {
  // Success.
  SPE_STATUS_OK = 0,
  // A required pointer argument was null.
  SPE_STATUS_NULL_POINTER = 1,
  // An argument was malformed (bad UTF-8, out-of-range value, index).
  SPE_STATUS_INVALID_ARGUMENT = 2,
  // The configuration could not be parsed or resolved.
  SPE_STATUS_CONFIG_ERROR = 3,
  // The simulation or an internal step failed.
  SPE_STATUS_RUNTIME_ERROR = 4,
} SpeStatus;

// Opaque experiment configuration handle.
typedef struct SpeConfig SpeConfig;

// Opaque result handle of a Monte Carlo sweep.
typedef struct SpeSweep SpeSweep;

// One sweep grid point in C layout. `counts` holds the four channel
// counts of each of the four CHSH settings, setting-major
// (`counts[4*setting + channel]`, channels ordered 0V, 0H, 1V, 1H).
typedef struct SpeSweepPoint {
  double alpha;
  double theta;
  double s;
  double s_err;
  double correlations[4];
  double correlation_errors[4];
  uint64_t counts[16];
} SpeSweepPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Version of the library as a static NUL-terminated string; do not free.
const char *spe_version(void);

// Message of the last failure on this thread (empty string if none).
// The pointer stays valid until the next failing call on this thread; do
// not free.
const char *spe_last_error_message(void);

// Releases a string previously returned through a `char **` out-pointer.
//
// # Safety
// `s` must be a pointer obtained from this library's `char **`
// out-parameters (or null, which is a no-op), passed at most once.
void spe_string_free(char *s);

// Closed-form CHSH S for Bloch angle `alpha`, decoherence `epsilon` and
// state quality `eta`.
//
// # Safety
// `out_s` must be a valid pointer to writable memory for one `double`.
enum SpeStatus spe_theory_s(double alpha, double epsilon, double eta, double *out_s);

// Decoherence parameter ε for a Gaussian spectrum (`omega0`,
// `sigma_omega` in rad/s) after a time delay `delay` (s).
//
// # Safety
// `out_epsilon` must be a valid pointer to writable memory for one
// `double`.
enum SpeStatus spe_epsilon_from_delay(double omega0,
                                      double sigma_omega,
                                      double delay,
                                      double *out_epsilon);

// Coherence time (s) and length (m) of a Gaussian spectrum.
//
// # Safety
// `out_tau_c` and `out_l_c` must be valid pointers to writable memory
// for one `double` each.
enum SpeStatus spe_coherence_scales(double omega0,
                                    double sigma_omega,
                                    double *out_tau_c,
                                    double *out_l_c);

// Parses a JSON experiment config (optionally referencing a `"preset"`)
// into a new handle.
//
// # Safety
// `json` must be a valid NUL-terminated C string and `out_config` a
// valid pointer to an `SpeConfig *` slot.
enum SpeStatus spe_config_from_json(const char *json, struct SpeConfig **out_config);

// Builds a config handle from a built-in preset name (laser, led,
// halogen, incoherent, broadband_led).
//
// # Safety
// `name` must be a valid NUL-terminated C string and `out_config` a
// valid pointer to an `SpeConfig *` slot.
enum SpeStatus spe_config_from_preset(const char *name, struct SpeConfig **out_config);

// Sets the simulation seed on a config handle.
//
// # Safety
// `config` must be a live handle from `spe_config_from_json` or
// `spe_config_from_preset`.
enum SpeStatus spe_config_set_seed(struct SpeConfig *config, uint64_t seed);

// Releases a config handle (null is a no-op).
//
// # Safety
// `config` must be a live handle (or null), passed at most once.
void spe_config_free(struct SpeConfig *config);

// Runs the configured Monte Carlo CHSH sweep. The config must carry a
// seed (`"seed"` in JSON or [`spe_config_set_seed`]).
//
// # Safety
// `config` must be a live handle and `out_sweep` a valid pointer to an
// `SpeSweep *` slot.
enum SpeStatus spe_sweep_run(const struct SpeConfig *config, struct SpeSweep **out_sweep);

// Number of grid points in a sweep result.
//
// # Safety
// `sweep` must be a live handle and `out_len` a valid pointer to
// writable memory for one `uintptr_t`.
enum SpeStatus spe_sweep_len(const struct SpeSweep *sweep, size_t *out_len);

// Copies grid point `index` into `out_point`.
//
// # Safety
// `sweep` must be a live handle and `out_point` a valid pointer to
// writable memory for one `SpeSweepPoint`.
enum SpeStatus spe_sweep_point(const struct SpeSweep *sweep,
                               size_t index,
                               struct SpeSweepPoint *out_point);

// Serializes a sweep result as pretty JSON into a caller-owned string
// (release with [`spe_string_free`]).
//
// # Safety
// `sweep` must be a live handle and `out_json` a valid pointer to a
// `char *` slot.
enum SpeStatus spe_sweep_to_json(const struct SpeSweep *sweep, char **out_json);

// Releases a sweep handle (null is a no-op).
//
// # Safety
// `sweep` must be a live handle (or null), passed at most once.
void spe_sweep_free(struct SpeSweep *sweep);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPE_H */
