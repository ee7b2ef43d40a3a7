#ifndef RENYI_SIM_H
#define RENYI_SIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible function.
 */
typedef enum RsStatus {
  RS_STATUS_OK = 0,
  RS_STATUS_NULL_POINTER = 1,
  RS_STATUS_INVALID_ARGUMENT = 2,
  RS_STATUS_OUT_OF_RANGE = 3,
  RS_STATUS_INVALID_STATE = 4,
  RS_STATUS_PARSE = 5,
  RS_STATUS_INTERNAL = 6,
} RsStatus;

/**
 * Schedule family: 1 = fixed δ and τ, 2 = fixed five steps.
 */
typedef enum RsMethod {
  RS_METHOD_I = 1,
  RS_METHOD_II = 2,
} RsMethod;

/**
 * Gate selector for [`rs_state_apply_gate`] and [`rs_lower_gate`].
 */
typedef enum RsGateKind {
  /**
   * Angles: theta, phi.
   */
  RS_GATE_KIND_R = 0,
  RS_GATE_KIND_RZ = 1,
  RS_GATE_KIND_XX = 2,
  RS_GATE_KIND_H = 3,
  RS_GATE_KIND_CNOT = 4,
  RS_GATE_KIND_SWAP = 5,
  RS_GATE_KIND_C_SWAP = 6,
  RS_GATE_KIND_RX = 7,
  RS_GATE_KIND_RY = 8,
  RS_GATE_KIND_RZZ = 9,
} RsGateKind;

/**
 * Opaque state-vector handle.
 */
typedef struct RsState RsState;

/**
 * Counts of a lowered gate or circuit.
 */
typedef struct RsLoweringInfo {
  size_t entangling_count;
  /**
   * Single-qubit native gates, Rz included.
   */
  size_t single_qubit_count;
  /**
   * Parallel depth with Rz excluded.
   */
  size_t depth;
  /**
   * `1 − |Tr(U†V)|/dim` between the logical and lowered unitaries.
   */
  double residual;
} RsLoweringInfo;

/**
 * Swap-test purity estimate.
 */
typedef struct RsR2Estimate {
  /**
   * False when post-selection discarded every shot; `r2` and `std_err` are then 0.
   */
  bool defined;
  double r2;
  double std_err;
  double p0;
  double p1;
  double yield_fraction;
} RsR2Estimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *rs_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rs_version(void);

/**
 * Creates `|0…0⟩` on `num_qubits` qubits.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle pointer.
 */
enum RsStatus rs_state_new_zero(size_t num_qubits, struct RsState **out);

/**
 * Prepares the adiabatic two-qubit state with the experiment preset of
 * `method` (δ = τ = 0.1 for method I, δ = 0.25 for method II).
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle pointer.
 */
enum RsStatus rs_state_new_prepared(enum RsMethod method, double u, struct RsState **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `state` must be null or a handle from this library not yet freed.
 */
void rs_state_free(struct RsState *state);

/**
 * Number of qubits, or 0 for a null handle.
 *
 * # Safety
 * `state` must be null or a live handle.
 */
size_t rs_state_num_qubits(const struct RsState *state);

/**
 * Applies one gate. `qubits` and `angles` hold the operands in the order
 * documented on [`RsGateKind`].
 *
 * # Safety
 * `state` must be a live handle; `qubits`/`angles` must hold `num_qubits`/`num_angles` elements.
 */
enum RsStatus rs_state_apply_gate(struct RsState *state,
                                  enum RsGateKind kind,
                                  const size_t *qubits,
                                  size_t num_qubits,
                                  const double *angles,
                                  size_t num_angles);

/**
 * Writes the `2^n` outcome probabilities (MSB-first indexing) into `out`.
 *
 * # Safety
 * `state` must be a live handle; `out` must hold `len` writable doubles.
 */
enum RsStatus rs_state_probabilities(const struct RsState *state, double *out, size_t len);

/**
 * Purity `Tr(ρ_A²)` with A the first qubit and B the rest.
 *
 * # Safety
 * `state` must be a live handle; `out` must be writable.
 */
enum RsStatus rs_state_purity(const struct RsState *state, double *out);

/**
 * Exact ground-state purity of the dimer at interaction `u` (hopping 1).
 *
 * # Safety
 * `out` must be writable.
 */
enum RsStatus rs_exact_r2(double u, double *out);

/**
 * Ground energy `−√(U² + 16)/2` of the two-qubit Hamiltonian.
 */
double rs_ground_energy(double u);

/**
 * Lowers one gate on qubits `0, 1, …` onto native gates with the given
 * XX signs (each ±1) and reports counts and the verification residual.
 *
 * # Safety
 * `angles` must hold `num_angles` elements; `out` must be writable.
 */
enum RsStatus rs_lower_gate(enum RsGateKind kind,
                            const double *angles,
                            size_t num_angles,
                            int32_t alpha,
                            int32_t beta,
                            int32_t gamma,
                            struct RsLoweringInfo *out);

/**
 * Lowers the full five-qubit swap-test circuit for the preset of `method` at `u`.
 *
 * # Safety
 * `out` must be writable.
 */
enum RsStatus rs_lower_swap_test(enum RsMethod method,
                                 double u,
                                 bool final_hadamards,
                                 struct RsLoweringInfo *out);

/**
 * Purity estimate from 32 swap-test outcome counts (ancilla = most
 * significant bit), optionally discarding the zero-weight outcomes.
 *
 * # Safety
 * `counts` must hold `len` elements; `out` must be writable.
 */
enum RsStatus rs_estimate_r2(const uint64_t *counts,
                             size_t len,
                             bool post_select,
                             struct RsR2Estimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RENYI_SIM_H */
