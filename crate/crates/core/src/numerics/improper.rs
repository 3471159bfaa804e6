//! Improper time integrals `int_T^inf g(t) dt`: adaptive quadrature on a
//! truncated window plus a power-law tail fitted on the last decade.

use super::quad::integrate_real;
use super::QuadratureSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailModel {
    None,
    /// Fit `g ~ c t^{-p}` on `[t_max/10, t_max]` and integrate the model
    /// beyond the truncation point.
    PowerLawFit,
}

#[derive(Debug, Clone, Copy)]
pub struct TimeIntegral {
    /// Integral over the truncated window `[t_start, t_max]`.
    pub truncated: f64,
    /// Estimated contribution of `[t_max, inf)` from the fitted tail model.
    pub tail_estimate: f64,
    pub error_estimate: f64,
    /// Fitted decay exponent `p` (positive for decaying integrands).
    pub fitted_exponent: Option<f64>,
    pub fitted_coefficient: Option<f64>,
    /// Set when the fitted exponent is <= 1 so the tail integral diverges;
    /// `tail_estimate` is then zero and `truncated` is the only value.
    pub tail_divergent: bool,
    pub evaluations: usize,
    pub converged: bool,
}

impl TimeIntegral {
    pub fn total(&self) -> f64 {
        self.truncated + self.tail_estimate
    }
}

/// Least-squares slope/intercept of `ln |g|` against `ln t` on the window
/// `[t_lo, t_hi]`, with `n` log-spaced samples.  Returns `(exponent, coeff,
/// residual)` for the model `|g| = coeff * t^{-exponent}`.
pub fn fit_power_law<G: Fn(f64) -> f64>(
    g: G,
    t_lo: f64,
    t_hi: f64,
    n: usize,
) -> Option<(f64, f64, f64)> {
    let n = n.max(8);
    let mut pts = Vec::with_capacity(n);
    for i in 0..n {
        let t = t_lo * (t_hi / t_lo).powf(i as f64 / (n - 1) as f64);
        let v = g(t).abs();
        if v > 1e-300 && v.is_finite() {
            pts.push((t.ln(), v.ln()));
        }
    }
    if pts.len() < n / 2 {
        return None;
    }
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = m * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return None;
    }
    let slope = (m * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / m;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    Some((-slope, intercept.exp(), residual))
}

/// Integrate `g` over `[t_start, t_max]` and estimate the tail beyond
/// `t_max`.  The window quadrature uses log-spaced initial panels so slowly
/// decaying integrands over several decades are resolved without excessive
/// subdivision near the far end.
pub fn integrate_improper_time<G: Fn(f64) -> f64>(
    g: G,
    t_start: f64,
    t_max: f64,
    spec: &QuadratureSpec,
    tail_model: TailModel,
) -> Result<TimeIntegral> {
    spec.validate()?;
    if !(t_start >= 0.0) || !(t_max > t_start) {
        return Err(Error::Argument(format!(
            "invalid time window [{t_start}, {t_max}]"
        )));
    }
    // log-spaced breakpoints (linear near zero if t_start == 0)
    let mut pts = vec![t_start];
    let lo = t_start.max(1e-3);
    if t_start < lo {
        pts.push(lo);
    }
    let decades = (t_max / lo).log10().max(0.1);
    let per_decade = 4usize;
    let n = ((decades * per_decade as f64).ceil() as usize).max(2);
    for i in 1..=n {
        pts.push(lo * (t_max / lo).powf(i as f64 / n as f64));
    }
    let win = integrate_real(&g, &pts, spec);
    let truncated = win.value.re;
    let mut out = TimeIntegral {
        truncated,
        tail_estimate: 0.0,
        error_estimate: win.error_estimate,
        fitted_exponent: None,
        fitted_coefficient: None,
        tail_divergent: false,
        evaluations: win.evaluations,
        converged: win.converged,
    };
    if tail_model == TailModel::PowerLawFit {
        match fit_power_law(&g, t_max / 10.0, t_max, 12) {
            Some((p, c, residual)) => {
                out.fitted_exponent = Some(p);
                out.fitted_coefficient = Some(c);
                if p <= 1.0 {
                    out.tail_divergent = true;
                } else {
                    let tail = c * t_max.powf(1.0 - p) / (p - 1.0);
                    out.tail_estimate = tail;
                    // fit-quality contribution to the error bound
                    out.error_estimate += tail * (residual.min(1.0) + 1e-3);
                }
            }
            None => {
                // integrand vanished on the fit window: no tail to add
                out.fitted_exponent = None;
            }
        }
    }
    Ok(out)
}
