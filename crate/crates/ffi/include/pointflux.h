/* C ABI for the pointflux point-interaction scattering laboratory. */

#ifndef POINTFLUX_H
#define POINTFLUX_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every ABI function.
 */
typedef enum {
  PF_STATUS_PF_OK = 0,
  PF_STATUS_PF_ERR_NULL_POINTER = 1,
  PF_STATUS_PF_ERR_UTF8 = 2,
  PF_STATUS_PF_ERR_ARGUMENT = 3,
  PF_STATUS_PF_ERR_RANGE = 4,
  PF_STATUS_PF_ERR_SINGULARITY = 5,
  PF_STATUS_PF_ERR_CONFIG = 6,
  PF_STATUS_PF_ERR_IO = 7,
  PF_STATUS_PF_ERR_NOT_CONVERGED = 8,
  PF_STATUS_PF_ERR_PANIC = 9,
} PfStatus;

/**
 * Opaque laboratory handle: an interaction, a prepared state, and the
 * quadrature policy, with the outgoing-profile tables cached inside.
 */
typedef struct PfLab PfLab;

/**
 * One evolved sample: value and radial derivative at `(r, t)`.
 */
typedef struct {
  double value_re;
  double value_im;
  double derivative_re;
  double derivative_im;
} PfSample;

/**
 * Flux-across-surfaces balance at one radius.
 */
typedef struct {
  double lhs_truncated;
  double tail_estimate;
  double rhs;
  double relative_error;
  double t_max;
  /**
   * 1 when the tail fit flags divergence, else 0.
   */
  int32_t tail_divergent;
  /**
   * 1 when every quadrature converged, else 0.
   */
  int32_t converged;
} PfFasReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread; valid until the next
 * failing call on the same thread.  Never null.
 */
const char *pf_last_error(void);

/**
 * Create a laboratory.
 *
 * `preset` is one of `"gaussian"`, `"exponential"`, `"w_projected"`,
 * `"bound_orthogonal"`; `sigma` is used by the gaussian preset only;
 * `abs_tol <= 0` selects the default tolerance.  On success writes the new
 * handle to `out_lab`.
 */
PfStatus pf_lab_new(double alpha,
                    const char *preset,
                    double sigma,
                    double abs_tol,
                    PfLab **out_lab);

/**
 * Release a handle; accepts null.
 */
void pf_lab_free(PfLab *lab);

/**
 * L2 norm of the prepared state (1 for normalized presets, less than 1 for
 * the bound-orthogonal preset's free part after projection).
 */
PfStatus pf_state_norm(const PfLab *lab, double *out_norm);

/**
 * Whether the state satisfies the zero-resonance pseudo-orthogonality
 * condition (vanishing `int psi(x)/|x| dx`); writes 1 or 0.
 */
PfStatus pf_in_w(const PfLab *lab, int32_t *out_in_w);

/**
 * Evolve the state to `(r, t)` via the propagator decomposition.
 */
PfStatus pf_evolve(const PfLab *lab, double r, double t, PfSample *out_sample);

/**
 * Radial profile of the asymptotic outgoing state at momentum `k > 0`.
 */
PfStatus pf_outgoing_value(const PfLab *lab, double k, double *out_re, double *out_im);

/**
 * Flux-across-surfaces balance at one radius over `[t_start, inf)`; the
 * time integral is truncated adaptively and the fitted tail is reported.
 */
PfStatus pf_fas_report(const PfLab *lab, double radius, double t_start, PfFasReport *out_report);

/**
 * Momentum-space side of the flux identity over the full sphere.
 */
PfStatus pf_fas_rhs(const PfLab *lab, double *out_rhs);

/**
 * Both sides of the exact main-term identity at `(radius, t_start)`.
 */
PfStatus pf_main_term_identity(const PfLab *lab,
                               double radius,
                               double t_start,
                               double *out_lhs,
                               double *out_rhs);

/**
 * Library version as a static C string.
 */
const char *pf_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POINTFLUX_H */
