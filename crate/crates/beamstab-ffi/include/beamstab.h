#ifndef BEAMSTAB_H
#define BEAMSTAB_H

/* Generated by cbindgen from the beamstab-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status of a C-ABI call.
 */
typedef enum BsStatus {
  /**
   * Success.
   */
  BS_STATUS_OK = 0,
  /**
   * A solver failed numerically.
   */
  BS_STATUS_NUMERICAL_ERROR = 1,
  /**
   * An argument violated its documented constraint.
   */
  BS_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A required pointer was null.
   */
  BS_STATUS_NULL_POINTER = 3,
  /**
   * Internal panic; state may be inconsistent.
   */
  BS_STATUS_PANIC = 4,
} BsStatus;

/**
 * Opaque symmetric piecewise-constant density.
 */
typedef struct BsDensity BsDensity;

/**
 * Opaque spectrum: eigenvalues with parity labels, sorted increasingly.
 */
typedef struct BsSpectrum BsSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *bs_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *bs_version(void);

/**
 * The homogeneous unit density.
 */
enum BsStatus bs_density_homogeneous(struct BsDensity **out);

/**
 * Two-step density with the heavy (`heavy_center != 0`) or light material
 * at the center of the beam.
 */
enum BsStatus bs_density_two_step(double alpha,
                                  double beta,
                                  int32_t heavy_center,
                                  struct BsDensity **out);

/**
 * Bang-bang density from `n_breakpoints` jump abscissae in `(0, pi)` and
 * `n_breakpoints + 1` piece values (each `alpha` or `beta`).
 *
 * # Safety
 * `breakpoints` must point to `n_breakpoints` readable doubles and
 * `values` to `n_breakpoints + 1` readable doubles.
 */
enum BsStatus bs_density_from_parts(double alpha,
                                    double beta,
                                    const double *breakpoints,
                                    uintptr_t n_breakpoints,
                                    const double *values,
                                    struct BsDensity **out);

/**
 * Total mass of the density over the full beam.
 *
 * # Safety
 * `density` must be a live handle from this library.
 */
enum BsStatus bs_density_mass(const struct BsDensity *density, double *out);

/**
 * Point evaluation of the density at `x` in `[-pi, pi]`.
 *
 * # Safety
 * `density` must be a live handle from this library.
 */
enum BsStatus bs_density_eval(const struct BsDensity *density, double x, double *out);

/**
 * Number of density jumps on the half-beam.
 *
 * # Safety
 * `density` must be a live handle from this library.
 */
enum BsStatus bs_density_jump_count(const struct BsDensity *density, uintptr_t *out);

/**
 * Release a density handle. Null is ignored.
 *
 * # Safety
 * `density` must be a handle from this library, not yet freed.
 */
void bs_density_free(struct BsDensity *density);

/**
 * Compute the first `count` eigenvalues for a density and pier position.
 *
 * Densities with at most one jump use the closed-form solver; general
 * bang-bang densities the eigenbasis expansion of order `n_basis`
 * (`count <= 12` in that case).
 *
 * # Safety
 * `density` must be a live handle from this library.
 */
enum BsStatus bs_spectrum_compute(const struct BsDensity *density,
                                  double a,
                                  uintptr_t count,
                                  uintptr_t n_basis,
                                  struct BsSpectrum **out);

/**
 * Number of eigenvalues held by a spectrum handle.
 *
 * # Safety
 * `spectrum` must be a live handle from this library.
 */
enum BsStatus bs_spectrum_len(const struct BsSpectrum *spectrum, uintptr_t *out);

/**
 * Copy eigenvalues into `buffer` (capacity `len`); writes the copied count.
 * Parities go to `parities` (0 even, 1 odd) when it is non-null.
 *
 * # Safety
 * `spectrum` must be a live handle; `buffer` (and `parities` if non-null)
 * must have room for `len` entries.
 */
enum BsStatus bs_spectrum_eigenvalues(const struct BsSpectrum *spectrum,
                                      double *buffer,
                                      int32_t *parities,
                                      uintptr_t len,
                                      uintptr_t *written);

/**
 * Release a spectrum handle. Null is ignored.
 *
 * # Safety
 * `spectrum` must be a handle from this library, not yet freed.
 */
void bs_spectrum_free(struct BsSpectrum *spectrum);

/**
 * Instability threshold of a twelve-mode spectrum: the minimum critical
 * energy over consecutive pairs and the 1-based index of its lower mode.
 *
 * # Safety
 * `spectrum` must be a live handle from this library.
 */
enum BsStatus bs_threshold(const struct BsSpectrum *spectrum,
                           double *out_threshold,
                           uintptr_t *out_pair_index);

/**
 * Critical amplitude `sqrt(2(nu - lambda))` of the pair.
 */
enum BsStatus bs_critical_amplitude(double lambda, double nu, double *out);

/**
 * Critical energy of instability of the pair.
 */
enum BsStatus bs_critical_energy(double lambda, double nu, double *out);

/**
 * Period of the one-mode nonlinear oscillation of amplitude `zeta`.
 */
enum BsStatus bs_duffing_period(double lambda, double zeta, double *out);

/**
 * Run the density-improvement loop at a fixed pier position and material
 * bounds. On success writes the best density handle, its threshold and the
 * jump count of the optimum.
 */
enum BsStatus bs_optimize_density(double alpha,
                                  double beta,
                                  double a,
                                  uintptr_t n_basis,
                                  struct BsDensity **out_density,
                                  double *out_threshold,
                                  uintptr_t *out_n_jumps);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BEAMSTAB_H */
