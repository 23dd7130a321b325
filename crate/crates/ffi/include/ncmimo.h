#ifndef NCMIMO_H
#define NCMIMO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every FFI entry point.
 */
typedef enum NcStatus {
  Ok = 0,
  DomainError = 1,
  NoConvergence = 2,
  NoSolution = 3,
  InvalidInput = 4,
  NullPointer = 5,
  InternalError = 6,
} NcStatus;

/**
 * Opaque discrete input handle.
 */
typedef struct NcInput NcInput;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code.
 */
const uint8_t *nc_status_message(enum NcStatus status);

/**
 * ζ_s solving Ψ(ζ) − ln ζ = Ψ(n_r) − ln(n_r(1+P)).
 */
enum NcStatus nc_solve_zeta_s(uint32_t n_r, double p, double *out);

/**
 * Capacity supremum C_sup = G(ζ_s) − G(n_r) in nats.
 */
enum NcStatus nc_capacity_supremum(uint32_t n_r, double p, double *out);

/**
 * β>0 branch capacity; `NC_STATUS_NO_SOLUTION` where the branch is empty.
 */
enum NcStatus nc_capacity_beta_positive(uint32_t n_r,
                                        double p,
                                        double *out_nats,
                                        double *out_alpha);

/**
 * High-SNR approximation ln(ln(n_r(1+P))).
 */
enum NcStatus nc_asymptotic_capacity(uint32_t n_r, double p, double *out);

/**
 * Double-log reference curve ln(1 + ln(1 + SNR)).
 */
enum NcStatus nc_double_log_reference(double snr, double *out);

/**
 * Coherent (receiver-CSI) Monte Carlo capacity estimate.
 */
enum NcStatus nc_coherent_capacity_mc(uint32_t n_r,
                                      uint32_t n_t,
                                      double p,
                                      uint64_t samples,
                                      uint64_t seed,
                                      double *out_mean,
                                      double *out_stderr);

/**
 * Sengupta-Mitra large-n_r capacity.
 */
enum NcStatus nc_sengupta_capacity(uint32_t n_r, uint32_t n_t, double p, double *out);

/**
 * Build a discrete input from parallel magnitude/probability arrays.
 * The handle must be released with `nc_input_free`.
 */
enum NcStatus nc_input_new(const double *magnitudes,
                           const double *probabilities,
                           uintptr_t len,
                           struct NcInput **out);

/**
 * Release a discrete input handle. Null is a no-op.
 */
void nc_input_free(struct NcInput *input);

/**
 * Number of mass points in the handle.
 */
enum NcStatus nc_input_len(const struct NcInput *input, uintptr_t *out);

/**
 * Copy the mass points into caller-provided arrays of length `len`.
 */
enum NcStatus nc_input_points(const struct NcInput *input,
                              double *magnitudes,
                              double *probabilities,
                              uintptr_t len);

/**
 * Mutual information of a discrete input through the magnitude channel.
 */
enum NcStatus nc_mutual_information(const struct NcInput *input, uint32_t n_r, double *out);

/**
 * Optimize a discrete input for the given (n_r, P); returns the optimized
 * input as a fresh handle plus the attained capacity.
 */
enum NcStatus nc_optimize_discrete_input(uint32_t n_r,
                                         double p,
                                         uintptr_t max_points,
                                         uint64_t seed,
                                         struct NcInput **out_input,
                                         double *out_nats);

/**
 * Kuhn-Tucker check of a candidate input at the given capacity value.
 */
enum NcStatus nc_kt_check(const struct NcInput *input,
                          uint32_t n_r,
                          double p,
                          double capacity_nats,
                          double *out_violation,
                          double *out_multiplier);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NCMIMO_H */
