/* C interface for the anharmonic oscillator toolkit. */

#pragma once

/* Generated with cbindgen:0.29.4 */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum AnhStatus {
  ANH_STATUS_OK = 0,
  /**
   * Invalid configuration or arguments.
   */
  ANH_STATUS_CONFIG = 1,
  /**
   * A numerical routine failed to converge or hit a domain error.
   */
  ANH_STATUS_NUMERIC = 2,
  /**
   * A required pointer argument was NULL.
   */
  ANH_STATUS_NULL_ARGUMENT = 3,
  /**
   * A string argument was not valid UTF-8.
   */
  ANH_STATUS_UTF8 = 4,
  /**
   * Internal panic; state is still consistent but the call failed.
   */
  ANH_STATUS_PANIC = 5,
} AnhStatus;

/**
 * Opaque handle over the semiclassical series evaluators.
 */
typedef struct AnhGbSeries AnhGbSeries;

/**
 * Opaque potential handle.
 */
typedef struct AnhPotential AnhPotential;

/**
 * Opaque handle over the exact-rational ground-state series.
 */
typedef struct AnhRbSeries AnhRbSeries;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent error on this thread. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *anh_last_error_message(void);

/**
 * Release a string allocated by this library.
 *
 * # Safety
 * `s` must have been returned by a function of this library and not
 * freed before.
 */
void anh_string_free(char *s);

/**
 * Parse a potential from its JSON description.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string and `out` a valid
 * pointer.
 */
enum AnhStatus anh_potential_from_json(const char *json, struct AnhPotential **out);

/**
 * Quartic oscillator profile u^2 + u^4 with the given coupling and
 * hbar.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum AnhStatus anh_potential_quartic(double g, double hbar, struct AnhPotential **out);

/**
 * # Safety
 * `pot` must come from a constructor of this library and not be freed
 * twice.
 */
void anh_potential_free(struct AnhPotential *pot);

/**
 * Serialize the potential back to JSON (exact rational coefficients
 * when `exact` is nonzero). The string must be freed with
 * [`anh_string_free`].
 *
 * # Safety
 * `pot` and `out` must be valid pointers.
 */
enum AnhStatus anh_potential_to_json(const struct AnhPotential *pot, bool exact, char **out);

/**
 * Effective coupling hbar^(1/2) g.
 *
 * # Safety
 * `pot` must be a valid handle.
 */
double anh_potential_lambda(const struct AnhPotential *pot);

/**
 * Profile value Vhat(u).
 *
 * # Safety
 * `pot` must be a valid handle.
 */
double anh_potential_vhat(const struct AnhPotential *pot, double u);

/**
 * Compute the ground-state perturbation series to the given order.
 *
 * # Safety
 * `pot` must be a valid handle and `out` a valid pointer.
 */
enum AnhStatus anh_rb_series_compute(const struct AnhPotential *pot,
                                     uintptr_t order,
                                     struct AnhRbSeries **out);

/**
 * # Safety
 * `series` must come from [`anh_rb_series_compute`] and not be freed
 * twice.
 */
void anh_rb_series_free(struct AnhRbSeries *series);

/**
 * # Safety
 * `series` must be a valid handle.
 */
uintptr_t anh_rb_series_order(const struct AnhRbSeries *series);

/**
 * Energy coefficient as a double (NaN when out of range).
 *
 * # Safety
 * `series` must be a valid handle.
 */
double anh_rb_series_energy_coeff(const struct AnhRbSeries *series, uintptr_t n);

/**
 * Energy coefficient as an exact "num/den" string; free with
 * [`anh_string_free`].
 *
 * # Safety
 * `series` and `out` must be valid pointers.
 */
enum AnhStatus anh_rb_series_energy_coeff_rational(const struct AnhRbSeries *series,
                                                   uintptr_t n,
                                                   char **out);

/**
 * Partial sum of the energy series and its optimal-truncation index.
 *
 * # Safety
 * All pointers must be valid.
 */
enum AnhStatus anh_rb_partial_sum(const struct AnhRbSeries *series,
                                  double lambda,
                                  uintptr_t order,
                                  double *value,
                                  uintptr_t *optimal_index);

/**
 * Build the semiclassical series, consuming energy coefficients from
 * the quantum-frame series.
 *
 * # Safety
 * Handles must be valid and `out` a valid pointer.
 */
enum AnhStatus anh_gb_series_compute(const struct AnhPotential *pot,
                                     const struct AnhRbSeries *series,
                                     uintptr_t order,
                                     struct AnhGbSeries **out);

/**
 * # Safety
 * `series` must come from [`anh_gb_series_compute`] and not be freed
 * twice.
 */
void anh_gb_series_free(struct AnhGbSeries *series);

/**
 * Evaluate term n of the semiclassical series at u.
 *
 * # Safety
 * `series` and `out` must be valid pointers.
 */
enum AnhStatus anh_gb_term(const struct AnhGbSeries *series, uintptr_t n, double u, double *out);

/**
 * Integral of the second-order term from the origin (the determinant
 * logarithm) on the pole-cancelling branch.
 *
 * # Safety
 * `pot` and `out` must be valid pointers.
 */
enum AnhStatus anh_det_log(const struct AnhPotential *pot, double eps0, double u, double *out);

/**
 * Relaxation time from u0 down to u.
 *
 * # Safety
 * `pot` and `out` must be valid pointers.
 */
enum AnhStatus anh_flucton_time(const struct AnhPotential *pot, double u0, double u, double *out);

/**
 * One-arm reduced action and the density-matrix exponent.
 *
 * # Safety
 * All pointers must be valid.
 */
enum AnhStatus anh_flucton_action(const struct AnhPotential *pot,
                                  double u0,
                                  double *reduced,
                                  double *exponent);

/**
 * Relaxation path sampled on a uniform time grid: fills `us[i]` with
 * u(tau_max * i / (len - 1)).
 *
 * # Safety
 * `us` must point to at least `len` doubles.
 */
enum AnhStatus anh_flucton_path(const struct AnhPotential *pot,
                                double u0,
                                double tau_max,
                                double *us,
                                uintptr_t len);

/**
 * Log of the two-arm fluctuation determinant ratio.
 *
 * # Safety
 * `pot` and `out` must be valid pointers.
 */
enum AnhStatus anh_gy_det_log_ratio(const struct AnhPotential *pot,
                                    double u0,
                                    double t_box,
                                    double *out);

/**
 * Cross-checked eigenvalue of the given level.
 *
 * # Safety
 * `pot` and `out` must be valid pointers.
 */
enum AnhStatus anh_reference_energy(const struct AnhPotential *pot, uintptr_t level, double *out);

/**
 * Optimize the matched trial state (n, parity) of the quartic
 * oscillator at coupling g; returns the variational energy and the
 * optimal parameters.
 *
 * # Safety
 * All out-pointers must be valid.
 */
enum AnhStatus anh_variational_optimize(uintptr_t n,
                                        uintptr_t parity,
                                        double g,
                                        double *energy,
                                        double *a,
                                        double *b);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
