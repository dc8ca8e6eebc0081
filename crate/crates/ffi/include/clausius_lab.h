#ifndef CLAUSIUS_LAB_H
#define CLAUSIUS_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum ClStatus {
  CL_STATUS_OK = 0,
  CL_STATUS_NULL_POINTER = 1,
  CL_STATUS_INVALID_ARGUMENT = 2,
  CL_STATUS_NUMERICAL = 3,
  CL_STATUS_PARSE = 4,
  /**
   * A Rust panic was caught at the boundary; please report it.
   */
  CL_STATUS_INTERNAL = 5,
} ClStatus;

/**
 * Which continuum evaluation to use for the moments.
 */
typedef enum ClRoute {
  /**
   * Matsubara, or the spectral integral at very low temperature.
   */
  CL_ROUTE_AUTO = 0,
  CL_ROUTE_MATSUBARA = 1,
  CL_ROUTE_SPECTRAL = 2,
} ClRoute;

/**
 * A finite ensemble of density matrices with prior probabilities.
 */
typedef struct ClEnsemble ClEnsemble;

/**
 * Oscillator plus bath, in natural units.
 */
typedef struct ClSystem ClSystem;

/**
 * `<q^2>`, `<p^2>` and the symmetrized `<qp + pq>/2`.
 */
typedef struct ClMoments {
  double f1;
  double f2;
  double cross;
} ClMoments;

typedef struct ClThermoReport {
  double delta_entropy;
  double heat;
  double heat_error;
  /**
   * `k_B T dS - Q`; negative means the Clausius inequality fails.
   */
  double slack;
  bool clausius_satisfied;
} ClThermoReport;

typedef struct ClComposedReport {
  struct ClThermoReport coupling;
  struct ClThermoReport mass;
  struct ClThermoReport total;
} ClComposedReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or an empty string.
 * The pointer stays valid until the next `cl_*` call on the same thread.
 */
const char *cl_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cl_version(void);

/**
 * Creates a system from physical parameters: oscillator mass and
 * frequency, bath temperature, damping rate and Drude cutoff.
 *
 * # Safety
 * `out` must be valid for writes. The handle must be freed with [`cl_system_free`].
 */
enum ClStatus cl_system_new(double mass,
                            double frequency,
                            double temperature,
                            double damping,
                            double cutoff,
                            struct ClSystem **out);

/**
 * Creates a unit oscillator (`M = omega = 1`) with a bath given by the
 * ratios `k_B T/hbar omega`, `gamma/omega` and `wD/omega`.
 *
 * # Safety
 * As for [`cl_system_new`].
 */
enum ClStatus cl_system_from_ratios(double reduced_temperature,
                                    double damping_ratio,
                                    double cutoff_ratio,
                                    struct ClSystem **out);

/**
 * # Safety
 * `system` is null or a handle from `cl_system_new*` not yet freed.
 */
void cl_system_free(struct ClSystem *system);

/**
 * Equilibrium moments of the reduced oscillator state.
 *
 * # Safety
 * `system` is a live handle; `out` is valid for writes.
 */
enum ClStatus cl_moments(const struct ClSystem *system, enum ClRoute route, struct ClMoments *out);

/**
 * Moments from an explicit bath of `modes` oscillators, diagonalized
 * exactly. `omega_max <= 0` picks the default `20 max(wD, omega)`.
 *
 * # Safety
 * As for [`cl_moments`].
 */
enum ClStatus cl_oracle_moments(const struct ClSystem *system,
                                size_t modes,
                                double omega_max,
                                struct ClMoments *out);

/**
 * Von Neumann entropy (nats) of the Gaussian state with these moments.
 *
 * # Safety
 * `moments` is readable; `out` is valid for writes.
 */
enum ClStatus cl_gaussian_entropy(const struct ClMoments *moments, double *out);

/**
 * Mass change `M -> mass_factor M` at fixed friction `M gamma`.
 * `grid_points` must be odd and at least 9.
 *
 * # Safety
 * As for [`cl_moments`].
 */
enum ClStatus cl_mass_process(const struct ClSystem *system,
                              double mass_factor,
                              size_t grid_points,
                              struct ClThermoReport *out);

/**
 * Switch the coupling on, then change the mass; reports both steps and the total.
 *
 * # Safety
 * As for [`cl_moments`].
 */
enum ClStatus cl_composed_process(const struct ClSystem *system,
                                  double mass_factor,
                                  size_t grid_points,
                                  struct ClComposedReport *out);

/**
 * Minimal erasure heat `k_B T S` for entropy `entropy` (nats).
 *
 * # Safety
 * `out` is valid for writes.
 */
enum ClStatus cl_landauer_bound(double entropy, double temperature, double *out);

/**
 * Builds an ensemble of `count` states of dimension `dim`. Matrix `k` is
 * read row-major from `re[k*dim*dim ..]` and `im[k*dim*dim ..]`.
 *
 * # Safety
 * `probabilities` has `count` entries, `re` and `im` have `count*dim*dim`
 * entries each, `out` is valid for writes. Free with [`cl_ensemble_free`].
 */
enum ClStatus cl_ensemble_new(size_t dim,
                              size_t count,
                              const double *probabilities,
                              const double *re,
                              const double *im,
                              struct ClEnsemble **out);

/**
 * Parses the plain-text ensemble format used by the CLI.
 *
 * # Safety
 * `text` is a NUL-terminated string; `out` is valid for writes.
 */
enum ClStatus cl_ensemble_parse(const char *text, struct ClEnsemble **out);

/**
 * # Safety
 * `ensemble` is null or a live handle from `cl_ensemble_*`.
 */
void cl_ensemble_free(struct ClEnsemble *ensemble);

/**
 * Holevo quantity in nats.
 *
 * # Safety
 * `ensemble` is a live handle; `out` is valid for writes.
 */
enum ClStatus cl_holevo_chi(const struct ClEnsemble *ensemble, double *out);

/**
 * Best mutual information (nats) found by searching projective qubit
 * measurements; a lower bound on the accessible information. `effort`
 * sets the search grid (32 is a good default).
 *
 * # Safety
 * As for [`cl_holevo_chi`].
 */
enum ClStatus cl_accessible_info_lower(const struct ClEnsemble *ensemble,
                                       size_t effort,
                                       double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CLAUSIUS_LAB_H */
