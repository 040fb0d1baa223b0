#ifndef WAVEMIX_H
#define WAVEMIX_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WmStatus {
  WM_STATUS_OK = 0,
  WM_STATUS_NULL_POINTER = 1,
  WM_STATUS_INVALID_ARGUMENT = 2,
  WM_STATUS_DEGENERATE_STEADY_STATE = 3,
  WM_STATUS_TRUNCATION_NOT_CONVERGED = 4,
  WM_STATUS_SOLVER_FAILURE = 5,
  WM_STATUS_BUFFER_TOO_SMALL = 6,
  WM_STATUS_PANIC = 7,
} WmStatus;

// Opaque steady state together with the parameters it was solved for.
typedef struct WmState WmState;

// System parameters in units of κ.
//
// `delta_auto != 0` selects Δ = Δ₁₂ + Δ₂₃ and ignores `delta`;
// `n_max == 0` selects automatic Fock truncation.
typedef struct WmParams {
  double g;
  double omega12;
  double omega23;
  double delta12;
  double delta23;
  double delta;
  int32_t delta_auto;
  double kappa;
  double gamma31;
  double gamma32;
  uint32_t n_max;
} WmParams;

// Steady-state observables. `g2_zero` and `ratio` are only meaningful when
// the matching `has_` flag is nonzero.
typedef struct WmObservables {
  double n_photon;
  double p33;
  double g2_zero;
  int32_t has_g2_zero;
  double ratio;
  int32_t has_ratio;
  double concurrence;
  double projected_trace;
} WmObservables;

typedef struct WmComplex {
  double re;
  double im;
} WmComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library defaults: g = 10, Ω₁₂ = 0.1, Ω₂₃ = 3, zero detunings with
// automatic Δ, κ = 1, Γ₃₁ = Γ₃₂ = 0.5 and automatic truncation.
struct WmParams wm_params_default(void);

// Solves for the steady state. On success `*out` owns a new handle.
//
// # Safety
// `params` must be null or point to a valid `WmParams`; `out` must be null
// or point to writable storage for a pointer.
enum WmStatus wm_steady_state(const struct WmParams *params, struct WmState **out);

// Releases a handle from [`wm_steady_state`]. Null is ignored.
//
// # Safety
// `state` must be null or a handle that has not been freed yet.
void wm_state_free(struct WmState *state);

// Fock truncation the state was solved at.
//
// # Safety
// `state` must be null or a live handle; `out` null or writable.
enum WmStatus wm_state_n_max(const struct WmState *state, uint32_t *out);

// # Safety
// `state` must be null or a live handle; `out` null or writable.
enum WmStatus wm_state_observables(const struct WmState *state, struct WmObservables *out);

// Writes the dark-state populations P₀⁰ … P_{len−1}⁰ into `out`.
//
// `len` may not exceed `n_max + 1` of the state.
//
// # Safety
// `state` must be null or a live handle; `out` null or valid for `len`
// writes.
enum WmStatus wm_state_dark_populations(const struct WmState *state, double *out, size_t len);

// Cavity-induced decay rate Γₙ⁰ of dark state `n ≥ 1`.
//
// # Safety
// `params` must be null or valid; `out` null or writable.
enum WmStatus wm_dark_decay_rate(const struct WmParams *params, size_t n, double *out);

// Strong-drive steady coherent amplitudes β₊ and β₋.
//
// # Safety
// `params` must be null or valid; `plus` and `minus` null or writable.
enum WmStatus wm_steady_amplitudes(const struct WmParams *params,
                                   struct WmComplex *plus,
                                   struct WmComplex *minus);

// Copies the calling thread's last error message into `buf` as a
// NUL-terminated string, truncating if needed. Returns the full message
// length in bytes without the terminator, so a caller can size a buffer
// by passing `len = 0`.
//
// # Safety
// `buf` must be null or valid for `len` writes.
size_t wm_last_error_message(char *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WAVEMIX_H */
