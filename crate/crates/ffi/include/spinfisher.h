#ifndef SPINFISHER_H
#define SPINFISHER_H

/* Generated by cbindgen from the spinfisher-ffi crate. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of every fallible call.
 */
typedef enum SfStatus {
  SF_STATUS_OK = 0,
  SF_STATUS_INVALID_ARGUMENT = 1,
  SF_STATUS_DIMENSION_MISMATCH = 2,
  SF_STATUS_NOT_NORMALIZED = 3,
  SF_STATUS_NON_CONVERGENCE = 4,
  SF_STATUS_NUMERICAL = 5,
  SF_STATUS_BINNING_MISMATCH = 6,
  SF_STATUS_NULL_POINTER = 7,
  SF_STATUS_BUFFER_TOO_SMALL = 8,
  SF_STATUS_PANIC = 9,
} SfStatus;

/**
 * Opaque outcome distribution over imbalance bins.
 */
typedef struct SfDistribution SfDistribution;

/**
 * Opaque pure state in the Dicke basis.
 */
typedef struct SfState SfState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; valid until the next failing call.
 */
const char *sf_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sf_version(void);

/**
 * Coherent state of `n_atoms` pointing along `(sin ϑ cos φ, sin ϑ sin φ, −cos ϑ)`.
 *
 * # Safety
 * `out` must be a valid pointer; the handle written there is owned by the caller.
 */
enum SfStatus sf_coherent_state(uintptr_t n_atoms,
                                double polar,
                                double azimuth,
                                struct SfState **out_state);

/**
 * # Safety
 * `state` must be null or a handle from this library not yet freed.
 */
void sf_state_free(struct SfState *state);

/**
 * Number of amplitudes, `n_atoms + 1`.
 *
 * # Safety
 * `state` and `out_dim` must be valid pointers.
 */
enum SfStatus sf_state_dim(const struct SfState *state, uintptr_t *out_dim);

/**
 * Copies the amplitudes into `re` and `im`, each of capacity `len`.
 *
 * # Safety
 * `re` and `im` must point to at least `len` writable doubles.
 */
enum SfStatus sf_state_amplitudes(const struct SfState *state,
                                  double *re,
                                  double *im,
                                  uintptr_t len);

/**
 * Evolves under `χJz² − ΩJx + δJz` (rad/s) for `duration` seconds into a new handle.
 *
 * # Safety
 * `state` and `out_state` must be valid pointers.
 */
enum SfStatus sf_state_evolve_constant(const struct SfState *state,
                                       double chi,
                                       double omega,
                                       double delta,
                                       double duration,
                                       struct SfState **out_state);

/**
 * Quantum Fisher information for collective rotations.
 *
 * # Safety
 * `state` and `out_qfi` must be valid pointers.
 */
enum SfStatus sf_state_qfi(const struct SfState *state, double *out_qfi);

/**
 * Imbalance distribution after the tomography rotation `alpha` about x and readout rotation `theta` about y.
 *
 * # Safety
 * `state` and `out_dist` must be valid pointers.
 */
enum SfStatus sf_distribution_from_state(const struct SfState *state,
                                         double alpha,
                                         double theta,
                                         struct SfDistribution **out_dist);

/**
 * # Safety
 * `dist` must be null or a handle from this library not yet freed.
 */
void sf_distribution_free(struct SfDistribution *dist);

/**
 * Number of bins.
 *
 * # Safety
 * `dist` and `out_len` must be valid pointers.
 */
enum SfStatus sf_distribution_len(const struct SfDistribution *dist, uintptr_t *out_len);

/**
 * Copies bin centers into `z` and probabilities into `p`, each of capacity `len`.
 *
 * # Safety
 * `z` and `p` must point to at least `len` writable doubles.
 */
enum SfStatus sf_distribution_values(const struct SfDistribution *dist,
                                     double *z,
                                     double *p,
                                     uintptr_t len);

/**
 * Gaussian noise of `sigma_atoms` on `N_b − N_a`, into a new handle.
 *
 * # Safety
 * `dist` and `out_dist` must be valid pointers.
 */
enum SfStatus sf_distribution_convolve(const struct SfDistribution *dist,
                                       double sigma_atoms,
                                       struct SfDistribution **out_dist);

/**
 * Merges bins to width `bin_width`, an integer multiple of the current width.
 *
 * # Safety
 * `dist` and `out_dist` must be valid pointers.
 */
enum SfStatus sf_distribution_rebin(const struct SfDistribution *dist,
                                    double bin_width,
                                    struct SfDistribution **out_dist);

/**
 * Squared Hellinger distance of two distributions on compatible grids.
 *
 * # Safety
 * All pointers must be valid.
 */
enum SfStatus sf_hellinger_squared(const struct SfDistribution *a,
                                   const struct SfDistribution *b,
                                   double *out_d2);

/**
 * Counts of `m_draws` multinomial samples, reproducible per `seed`, written into `counts` of capacity `len`.
 *
 * # Safety
 * `counts` must point to at least `len` writable unsigned 64-bit integers.
 */
enum SfStatus sf_sample(const struct SfDistribution *dist,
                        uintptr_t m_draws,
                        uint64_t seed,
                        uint64_t *counts,
                        uintptr_t len);

/**
 * Weighted fit of `d²(θ) = c + Fθ²/8 [+ F′θ³/16]` to `len` points.
 *
 * # Safety
 * `thetas`, `d2` and `sigma` must point to `len` doubles; outputs must be valid.
 */
enum SfStatus sf_fit_fisher(const double *thetas,
                            const double *d2,
                            const double *sigma,
                            uintptr_t len,
                            uintptr_t n_atoms,
                            bool cubic,
                            double *out_fisher,
                            double *out_std_error);

/**
 * Predicted sampling offset `c₀` and quadratic bias `c₂` of the squared Hellinger distance.
 *
 * # Safety
 * Output pointers must be valid.
 */
enum SfStatus sf_bias_terms(uintptr_t n_occupied,
                            uintptr_t m_draws,
                            double fisher,
                            double *out_c0,
                            double *out_c2);

/**
 * `1/√(mF)`.
 *
 * # Safety
 * `out_bound` must be valid.
 */
enum SfStatus sf_cramer_rao_bound(double fisher, uintptr_t m, double *out_bound);

/**
 * Classical energy `(NΩ/2)[Λz²/2 − √(1−z²) cos φ + (δ/Ω) z]`.
 *
 * # Safety
 * `out_energy` must be valid.
 */
enum SfStatus sf_classical_energy(double lambda,
                                  double delta_over_omega,
                                  double omega,
                                  double n_atoms,
                                  double z,
                                  double phi,
                                  double *out_energy);

/**
 * Classical fixed points; writes up to `capacity` entries and the total in `out_count`.
 * `stable[k]` is 1 for a center and 0 for a saddle.
 *
 * # Safety
 * `z`, `phi` and `stable` must point to `capacity` writable entries; `out_count` must be valid.
 */
enum SfStatus sf_fixed_points(double lambda,
                              double delta_over_omega,
                              double *z,
                              double *phi,
                              int32_t *stable,
                              uintptr_t capacity,
                              uintptr_t *out_count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPINFISHER_H */
