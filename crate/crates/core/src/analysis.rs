//! Higher-level experiments: FAS convergence sweeps, decay-rate fits along
//! rays `x = v t`, the resonance divergence demo, and the momentum-space
//! singularity scan.

use crate::flux::{fas_lhs, FluxReport};
use crate::model::ConeSurface;
use crate::numerics::{fit_power_law, integrate_real};
#[cfg(test)]
use crate::numerics::QuadratureSpec;
use crate::propagator::{decomposition, leading_amplitude};
use crate::spectral::{spectral_components, OutgoingState};
use crate::{Complex64, Error, Result};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Which amplitude a [`decay_fit`] tracks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quantity {
    /// Free remainder, claimed `t^{-5/2}` along rays.
    R1,
    /// Spherical-wave remainder, claimed `x^{-1} t^{-3/2}` (total `-5/2`).
    R2,
    /// Interaction remainder (`alpha > 0`), claimed total `-5/2`.
    R3,
    /// Leading term, claimed `t^{-3/2}` along rays for `alpha != 0`.
    P,
    /// Spectral spherical-wave piece, bounded by `1/(R(R+t))` (total `-2`,
    /// attained along rays).
    B,
    /// Radial derivative of `B`.  The printed bound also gives total `-2`,
    /// but along `x = t` the stationary-phase boundary terms cancel one more
    /// order and the attained rate is `-3`; the bound holds, unattained.
    GradB,
    /// Resonant universal piece at fixed radius, `t^{-1}` once `t >> R^2`
    /// (the Faddeeva branch dominates before that crossover).
    B2 { radius: f64 },
}

impl Quantity {
    pub fn claimed_exponent(&self) -> f64 {
        match self {
            Quantity::R1 | Quantity::R2 | Quantity::R3 => -2.5,
            Quantity::P => -1.5,
            Quantity::B => -2.0,
            Quantity::GradB => -3.0,
            Quantity::B2 { .. } => -1.0,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Quantity::R1 => "R1",
            Quantity::R2 => "R2",
            Quantity::R3 => "R3",
            Quantity::P => "P",
            Quantity::B => "b",
            Quantity::GradB => "grad_b",
            Quantity::B2 { .. } => "b2",
        }
    }
}

/// Result of a log-log decay fit along `x = v t` (or at fixed radius for
/// [`Quantity::B2`]).
#[derive(Debug, Clone, Copy)]
pub struct DecayEstimate {
    pub quantity: Quantity,
    pub ray_speed: f64,
    pub fitted_exponent: f64,
    pub fit_residual: f64,
    pub window: (f64, f64),
    pub claimed_exponent: f64,
    /// Residual above 0.2 marks the fit unreliable.
    pub reliable: bool,
}

/// Truncated absolute-current integrals over a joint `(R, T_max)` schedule,
/// plus the saturation probe used for the verdict.
#[derive(Debug, Clone)]
pub struct DivergenceDemo {
    pub alpha: f64,
    pub schedule: Vec<(f64, f64)>,
    /// `int_T^{T_max_i} dt int_{Sigma_{R_i}} |A . n| dsigma` per entry.
    pub truncated_values: Vec<f64>,
    /// Time integrals at the largest scheduled radius up to `T_max / 100`,
    /// `T_max / 10`, and `T_max`: the divergence claimed at the resonance
    /// lives in the time direction (the integrand has a `1/t` tail at fixed
    /// radius), so saturation is probed per decade there.
    pub time_refinement: [f64; 3],
    pub growing: bool,
}

/// One FAS report per radius, sharing the right-hand side.
pub fn fas_sweep(
    out: &OutgoingState,
    radii: &[f64],
    t_start: f64,
    cone: &ConeSurface,
) -> Result<Vec<FluxReport>> {
    if radii.windows(2).any(|w| w[0] >= w[1]) || radii.iter().any(|&r| r <= 1.0) {
        return Err(Error::Argument(
            "radii must be increasing and all > 1".into(),
        ));
    }
    radii
        .par_iter()
        .map(|&r| fas_lhs(out, r, t_start, None, cone))
        .collect()
}

/// Log-log fit of the tracked amplitude over `>= 8` log-spaced times.
pub fn decay_fit(
    quantity: Quantity,
    out: &OutgoingState,
    ray_speed: f64,
    window: (f64, f64),
) -> Result<DecayEstimate> {
    if !(ray_speed > 0.0) {
        return Err(Error::Argument("ray_speed must be > 0".into()));
    }
    if !(window.0 >= 1.0 && window.1 > window.0) {
        return Err(Error::Argument(format!(
            "window must satisfy 1 <= t_min < t_max, got {window:?}"
        )));
    }
    let g = |t: f64| -> f64 {
        let x = match quantity {
            Quantity::B2 { radius } => radius,
            _ => ray_speed * t,
        };
        let v = match quantity {
            Quantity::R1 => decomposition(out, x, t).map(|d| d.r1.norm()),
            Quantity::R2 => decomposition(out, x, t).map(|d| d.r2.norm()),
            Quantity::R3 => decomposition(out, x, t).map(|d| d.r3.norm()),
            Quantity::P => decomposition(out, x, t).map(|d| d.p.norm()),
            Quantity::B => spectral_components(out, x, t).map(|s| s.b.value.norm()),
            Quantity::GradB => spectral_components(out, x, t).map(|s| s.b.derivative.norm()),
            Quantity::B2 { .. } => {
                // b2 only depends on the profile value at k = 0; the resonant
                // outgoing profile is singular (non-W) or vanishes (W) there,
                // so the universal term is tracked on the state's free
                // momentum profile via the closed form
                out.free_value(0.0).and_then(|psi0| {
                    crate::spectral::resonant_tail_integral(x, t)
                        .map(|i| ((2.0 / PI).sqrt() / x) * (psi0 * i).norm())
                })
            }
        };
        v.unwrap_or(f64::NAN)
    };
    let (exp_fit, _coeff, residual) = fit_power_law(g, window.0, window.1, 10)
        .ok_or_else(|| Error::Range("decay fit window produced no usable samples".into()))?;
    Ok(DecayEstimate {
        quantity,
        ray_speed,
        fitted_exponent: -exp_fit,
        fit_residual: residual,
        window,
        claimed_exponent: quantity.claimed_exponent(),
        reliable: residual <= 0.2,
    })
}

/// Truncated integrals of the absolute leading current over the schedule.
///
/// The printed limit mixes `R -> inf` with a time integral that already
/// diverges logarithmically at fixed radius for resonant non-W states, so
/// the verdict probes saturation in the time direction at the largest
/// scheduled radius: per-decade increments that stop shrinking (last
/// increment at least half the previous one) mean the absolute-value
/// integral is growing without bound; integrable contrasts collapse by
/// orders of magnitude per decade.
pub fn divergence_demo(
    out: &OutgoingState,
    t_start: f64,
    schedule: &[(f64, f64)],
) -> Result<DivergenceDemo> {
    if schedule.len() < 2 {
        return Err(Error::Argument("schedule needs at least 2 entries".into()));
    }
    if schedule
        .windows(2)
        .any(|w| w[0].0 >= w[1].0 || w[0].1 >= w[1].1)
    {
        return Err(Error::Argument(
            "schedule must be strictly increasing in both coordinates".into(),
        ));
    }
    let spec = out.quad.with_abs_tol(1e-10);
    let abs_flux = |radius: f64, lo: f64, hi: f64| -> Result<f64> {
        let g = |t: f64| {
            leading_amplitude(out, radius, t)
                .map(|a| 4.0 * PI * radius * radius * a.norm())
                .unwrap_or(f64::NAN)
        };
        // log-spaced panels over several decades
        let mut pts = vec![lo];
        let n = ((hi / lo).log10().ceil() * 6.0).max(4.0) as usize;
        for i in 1..=n {
            pts.push(lo * (hi / lo).powf(i as f64 / n as f64));
        }
        let q = integrate_real(g, &pts, &spec);
        Ok(q.value.re)
    };

    let truncated_values = schedule
        .par_iter()
        .map(|&(r, t_max)| abs_flux(r, t_start, t_max))
        .collect::<Result<Vec<f64>>>()?;

    let (r_last, t_last) = *schedule.last().unwrap();
    let marks = [t_last / 100.0, t_last / 10.0, t_last];
    let mut time_refinement = [0.0f64; 3];
    let mut acc = 0.0;
    let mut lo = t_start;
    for (i, &m) in marks.iter().enumerate() {
        if m > lo {
            acc += abs_flux(r_last, lo, m)?;
            lo = m;
        }
        time_refinement[i] = acc;
    }
    let d1 = time_refinement[1] - time_refinement[0];
    let d2 = time_refinement[2] - time_refinement[1];
    let growing = d2 > 0.0 && d2 >= 0.5 * d1;
    Ok(DivergenceDemo {
        alpha: out.interaction.alpha,
        schedule: schedule.to_vec(),
        truncated_values,
        time_refinement,
        growing,
    })
}

/// Log-log fit of `|psi_out(k)|` on `k in [1e-5, 1e-2]` plus a Richardson
/// estimate of the residue `lim k psi_out(k)`.
pub fn singularity_scan(out: &OutgoingState) -> Result<(f64, Complex64)> {
    let g = |k: f64| out.value(k).map(|v| v.norm()).unwrap_or(f64::NAN);
    let (p, _c, residual) = fit_power_law(g, 1e-5, 1e-2, 12)
        .ok_or_else(|| Error::Range("singularity scan produced no usable samples".into()))?;
    if residual > 0.2 {
        return Err(Error::Range(format!(
            "singularity fit unreliable, residual {residual:.3}"
        )));
    }
    // Richardson on r(k) = k psi_out(k) = a + b k + O(k^2) at k = 1e-2,
    // 1e-3, 1e-4 (ratio 10): two linear eliminations then one quadratic.
    let r2 = 1e-2 * out.value(1e-2)?;
    let r3 = 1e-3 * out.value(1e-3)?;
    let r4 = 1e-4 * out.value(1e-4)?;
    let l1 = (10.0 * r3 - r2) / 9.0;
    let l2 = (10.0 * r4 - r3) / 9.0;
    let residue = (100.0 * l2 - l1) / 99.0;
    Ok((-p, residue))
}
