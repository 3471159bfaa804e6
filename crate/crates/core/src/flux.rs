//! Probability current `j = 2 Im(psi* grad psi)`, flux through spheres and
//! cone portions, the time-integrated left-hand side of the flux-across-
//! surfaces identity, and the exact change-of-variables identity for the
//! main term.
//!
//! All evolution here is restricted to radial states, so the current is
//! isotropic and a cone of solid angle `Omega` carries exactly `Omega / 4 pi`
//! of the full-sphere flux; [`ConeSurface`] axes are metadata only.

use crate::model::{ConeSurface, WaveSample};
use crate::numerics::{
    integrate_improper_time, integrate_real, QuadratureSpec, TailModel, TimeIntegral,
};
use crate::propagator::{decomposition, PropagatorDecomposition};
use crate::spectral::{momentum_norm_sq, OutgoingState};
use crate::{Error, Result};
use std::f64::consts::PI;

/// Radial current with its main/remainder split at one `(radius, time)`.
#[derive(Debug, Clone, Copy)]
pub struct FluxSample {
    pub radius: f64,
    pub time: f64,
    /// `j . n = 2 Im(psi* d_r psi)` on the sphere of this radius.
    pub radial_current: f64,
    /// Leading contribution `(x/t) |P|^2 . n`.
    pub main_term: f64,
    /// Everything else, `N . n = j . n - (x/t)|P|^2`.
    pub remainder_term: f64,
}

/// One FAS comparison: truncated time integral of the outgoing flux plus a
/// fitted tail against the momentum-space cone integral.
#[derive(Debug, Clone, Copy)]
pub struct FluxReport {
    pub radius: f64,
    pub t_start: f64,
    pub t_max: f64,
    pub cone: ConeSurface,
    pub lhs_truncated: f64,
    pub tail_estimate: f64,
    pub rhs: f64,
    pub relative_error: f64,
    pub tail_divergent: bool,
    pub converged: bool,
}

/// `j . n` from a bare wave sample.
pub fn radial_current(sample: &WaveSample) -> f64 {
    2.0 * (sample.value.conj() * sample.derivative).im
}

/// Current split per the propagator decomposition at `(radius, time)`.
pub fn current(d: &PropagatorDecomposition, radius: f64, time: f64) -> FluxSample {
    let j = radial_current(&d.sample());
    let main = radius / time * d.p.norm_sqr();
    FluxSample {
        radius,
        time,
        radial_current: j,
        main_term: main,
        remainder_term: j - main,
    }
}

/// `int_{Sigma_R} j . n dsigma = Omega R^2 (j . n)` for radial states.
pub fn surface_flux(out: &OutgoingState, radius: f64, time: f64, cone: &ConeSurface) -> Result<f64> {
    let d = decomposition(out, radius, time)?;
    Ok(cone.solid_angle * radius * radius * current(&d, radius, time).radial_current)
}

/// Right-hand side of the FAS identity:
/// `int_{C(Sigma)} |psi_out(k)|^2 d^3k = Omega int_0^inf k^2 |psi_out|^2 dk`.
pub fn fas_rhs(out: &OutgoingState, cone: &ConeSurface) -> Result<f64> {
    Ok(cone.solid_angle / (4.0 * PI) * momentum_norm_sq(out)?)
}

/// 1st-percentile momentum of the outgoing density `|k psi_out(k)|^2`, used
/// to size the time window: the flux peak transits `Sigma_R` near
/// `t = R / (2 k)`, so the slowest relevant transit is `R / (2 k_low)`.
fn low_momentum(out: &OutgoingState) -> Result<f64> {
    let total = momentum_norm_sq(out)? / (4.0 * PI);
    let density = |k: f64| -> Result<f64> { Ok(out.value_times_k(k)?.norm_sqr()) };
    let mut cum = 0.0;
    let mut k = 0.0f64;
    let h = 0.01;
    let mut prev = density(k)?;
    while k < 100.0 {
        let next = density(k + h)?;
        cum += 0.5 * (prev + next) * h;
        k += h;
        prev = next;
        if cum >= 0.01 * total {
            break;
        }
    }
    Ok(k.max(0.05))
}

/// Default truncation point `max(50, 10 R / (2 k_low))` of the time integral.
pub fn suggested_t_max(out: &OutgoingState, radius: f64) -> Result<f64> {
    Ok((10.0 * radius / (2.0 * low_momentum(out)?)).max(50.0))
}

/// Truncated FAS left-hand side `int_T^{T_max} dt int_{Sigma_R} j . n dsigma`
/// with a power-law tail fitted on the last decade.  When `t_max` is `None`
/// the window starts at [`suggested_t_max`] and doubles until the tail
/// estimate drops below `1e-3 * rhs` (or `10^6` is reached).
pub fn fas_lhs(
    out: &OutgoingState,
    radius: f64,
    t_start: f64,
    t_max: Option<f64>,
    cone: &ConeSurface,
) -> Result<FluxReport> {
    if !(radius > 0.0) || !(t_start > 0.0) {
        return Err(Error::Argument(format!(
            "fas_lhs needs radius > 0 and T > 0; got R = {radius}, T = {t_start}"
        )));
    }
    let rhs = fas_rhs(out, cone)?;
    let g = |t: f64| -> f64 {
        surface_flux(out, radius, t, cone).unwrap_or(f64::NAN)
    };
    let spec = tighter(&out.quad, rhs);

    let mut hi = match t_max {
        Some(v) => {
            if !(v > t_start) {
                return Err(Error::Argument(format!(
                    "t_max must exceed T; got {v} <= {t_start}"
                )));
            }
            v
        }
        None => suggested_t_max(out, radius)?.max(2.0 * t_start),
    };
    let mut win = integrate_improper_time(&g, t_start, hi, &spec, TailModel::PowerLawFit)?;
    if t_max.is_none() {
        while !win.tail_divergent && win.tail_estimate.abs() > 1e-3 * rhs.abs() && hi < 1e6 {
            let lo = hi;
            hi *= 2.0;
            let chunk = integrate_improper_time(&g, lo, hi, &spec, TailModel::PowerLawFit)?;
            win = TimeIntegral {
                truncated: win.truncated + chunk.truncated,
                error_estimate: win.error_estimate + chunk.error_estimate,
                evaluations: win.evaluations + chunk.evaluations,
                converged: win.converged && chunk.converged,
                ..chunk
            };
        }
    }
    let lhs = win.truncated + win.tail_estimate;
    Ok(FluxReport {
        radius,
        t_start,
        t_max: hi,
        cone: *cone,
        lhs_truncated: win.truncated,
        tail_estimate: win.tail_estimate,
        rhs,
        relative_error: (lhs - rhs).abs() / rhs.abs().max(1e-300),
        tail_divergent: win.tail_divergent,
        converged: win.converged,
    })
}

/// Exact identity for the main term: substituting `k = R / 2t` in
///
/// ```text
///   int_T^inf dt int_{Sigma_R} (x/t)|P|^2 . n dsigma
///     = Omega int_0^{R/2T} k^2 |psi_out(k)|^2 dk
/// ```
///
/// turns the time integral into the momentum cone integral with no
/// asymptotic step.  Both sides are evaluated by independent quadratures in
/// their own variables; `|P|^2 (x/t)` is written through `|k psi_out(k)|^2`
/// so the resonant `1/k` singularity never appears.
pub fn main_term_identity(
    out: &OutgoingState,
    radius: f64,
    t_start: f64,
    cone: &ConeSurface,
) -> Result<(f64, f64)> {
    if !(radius > 0.0) || !(t_start > 0.0) {
        return Err(Error::Argument(format!(
            "main_term_identity needs radius > 0 and T > 0; got R = {radius}, T = {t_start}"
        )));
    }
    let omega = cone.solid_angle;
    // Omega R^2 (x/t)|P|^2 = Omega R / (2 t^2) |k psi_out(k)|^2 at k = R/2t
    let g = |t: f64| -> f64 {
        let k = radius / (2.0 * t);
        match out.value_times_k(k) {
            Ok(v) => omega * radius / (2.0 * t * t) * v.norm_sqr(),
            Err(_) => f64::NAN,
        }
    };
    let spec = tighter(&out.quad, 1.0);
    let t_hi = (50.0 * radius).max(2000.0);
    let win = integrate_improper_time(&g, t_start, t_hi, &spec, TailModel::PowerLawFit)?;
    let lhs_main = win.total();

    let k_hi = radius / (2.0 * t_start);
    // graded mesh toward k = 0 for the resonant profile
    let mut pts = vec![0.0];
    let mut p = (k_hi * 1e-8).min(1e-8);
    while p < k_hi {
        pts.push(p);
        p *= 2.0;
    }
    pts.push(k_hi);
    let rhs = integrate_real(
        |k| out.value_times_k(k).map(|v| v.norm_sqr()).unwrap_or(f64::NAN),
        &pts,
        &spec,
    );
    Ok((lhs_main, omega * rhs.value.re))
}

/// Tolerances scaled for integrals of magnitude ~`scale`.
fn tighter(spec: &QuadratureSpec, scale: f64) -> QuadratureSpec {
    let mut s = *spec;
    s.abs_tol = (1e-9 * scale.abs()).clamp(1e-13, 1e-8);
    s.rel_tol = s.rel_tol.min(1e-8);
    s.max_subdivisions = s.max_subdivisions.max(100_000);
    s
}
