//! Special functions and quadrature primitives shared by every other module:
//! the Faddeeva / complex-erfc family, adaptive Gauss-Kronrod panels for
//! complex integrands, oscillatory integrals with linear phase, and improper
//! time integrals with power-law tail estimation.

mod faddeeva;
mod improper;
mod oscillatory;
mod quad;

pub use faddeeva::{erfc_complex, faddeeva};
pub use improper::{fit_power_law, integrate_improper_time, TailModel, TimeIntegral};
pub use oscillatory::{integrate_oscillatory, DecayClass, Domain};
pub use quad::{integrate_complex, integrate_real, panels_for_phase};

use num_complex::Complex64;

/// `sin(x)/x`, stable near zero.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0 - x2 * x2 * x2 / 5040.0
    } else {
        x.sin() / x
    }
}

/// `d/dx sinc(x) = cos(x)/x - sin(x)/x^2`, stable near zero.
pub fn dsinc(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let x2 = x * x;
        x * (-1.0 / 3.0 + x2 / 30.0 - x2 * x2 / 840.0)
    } else {
        (x.cos() - x.sin() / x) / x
    }
}

/// Tolerances and strategy knobs for the quadrature routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub oscillation_strategy: OscillationStrategy,
    pub tail_cutoff_policy: TailCutoffPolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OscillationStrategy {
    /// Adaptive panel subdivision; panels are pre-split so the linear phase
    /// advances by at most a few periods per panel.
    AdaptivePanel,
    /// Filon-type phase extraction on panels whose phase change exceeds 2*pi.
    FilonPhaseExtraction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailCutoffPolicy {
    /// Truncate semi-infinite domains at a fixed length.
    FixedLength,
    /// Choose the cutoff so the amplitude tail bound is below `abs_tol / 10`.
    BoundDriven,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 4000,
            oscillation_strategy: OscillationStrategy::AdaptivePanel,
            tail_cutoff_policy: TailCutoffPolicy::BoundDriven,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(crate::Error::Argument("abs_tol must be > 0".into()));
        }
        if !(self.rel_tol > 0.0) {
            return Err(crate::Error::Argument("rel_tol must be > 0".into()));
        }
        if self.max_subdivisions < 1 {
            return Err(crate::Error::Argument(
                "max_subdivisions must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Tolerance actually met by a result of magnitude `m`.
    pub fn tolerance_for(&self, m: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * m)
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

/// Outcome of a quadrature: best value, error bound, and convergence flag.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl QuadResult {
    pub fn map(self, f: impl FnOnce(Complex64) -> Complex64) -> QuadResult {
        QuadResult {
            value: f(self.value),
            ..self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::{dsinc, sinc};

    #[test]
    fn sinc_matches_ratio_away_from_zero() {
        for &x in &[0.02, 0.5, 3.0, -7.5, 40.0] {
            assert!((sinc(x) - x.sin() / x).abs() < 1e-15);
            assert!((dsinc(x) - (x.cos() - x.sin() / x) / x).abs() < 1e-15);
        }
    }

    #[test]
    fn sinc_series_joins_smoothly() {
        // compare series branch against the ratio just inside the threshold
        for &x in &[1e-3, 5e-3, 9.9e-3] {
            assert!((sinc(x) - x.sin() / x).abs() < 1e-15, "x = {x}");
            let fd = (sinc(x + 1e-6) - sinc(x - 1e-6)) / 2e-6;
            assert!((dsinc(x) - fd).abs() < 1e-9, "x = {x}");
        }
        assert_eq!(sinc(0.0), 1.0);
        assert_eq!(dsinc(0.0), 0.0);
    }
}
