//! Domain types: point-interaction couplings, radial initial states with
//! analytic preset profiles, cone surfaces, and run configuration.

use crate::numerics::{integrate_real, DecayClass, QuadResult, QuadratureSpec};
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

/// Sign regime of the coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `alpha = 0`: zero-energy resonance.
    Resonant,
    /// `alpha > 0`: no bound state, regular scattering amplitude.
    Positive,
    /// `alpha < 0`: one bound state with eigenvalue `-(4 pi alpha)^2`.
    Negative,
}

/// One point interaction of strength `alpha` centered at `center` (the
/// center is fixed to the origin for time evolution; eigenfunction
/// evaluation supports arbitrary centers).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointInteraction {
    pub alpha: f64,
    pub center: [f64; 3],
}

impl PointInteraction {
    pub fn at_origin(alpha: f64) -> Result<Self> {
        Self::new(alpha, [0.0; 3])
    }

    pub fn new(alpha: f64, center: [f64; 3]) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::Argument("alpha must be finite".into()));
        }
        Ok(PointInteraction { alpha, center })
    }

    pub fn regime(&self) -> Regime {
        if self.alpha == 0.0 {
            Regime::Resonant
        } else if self.alpha > 0.0 {
            Regime::Positive
        } else {
            Regime::Negative
        }
    }

    /// Bound-state eigenvalue `-(4 pi alpha)^2`; present only for `alpha < 0`.
    pub fn bound_state_energy(&self) -> Option<f64> {
        (self.regime() == Regime::Negative).then(|| -(4.0 * PI * self.alpha).powi(2))
    }

    /// Normalized bound state `sqrt(-2 alpha) exp(4 pi alpha r) / r`
    /// (`alpha < 0`); the normalization follows from
    /// `int |exp(4 pi alpha r)/r|^2 d^3x = -1/(2 alpha)`.
    pub fn bound_state(&self, r: f64) -> Option<f64> {
        (self.regime() == Regime::Negative)
            .then(|| (-2.0 * self.alpha).sqrt() * (4.0 * PI * self.alpha * r).exp() / r)
    }
}

/// Analytic preset profiles with known transforms and moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    /// `exp(-r^2 / (2 sigma^2))`, normalized.
    Gaussian { sigma: f64 },
    /// `exp(-r)`, normalized; not in the subspace W.
    ExponentialDecay,
    /// `exp(-r) (1 - r/2)`, normalized; lowest-order member of W built from
    /// the exponential profile.
    WProjectedExponential,
    /// `exp(-r) (1 + a r)` with `a = -(1 - 4 pi alpha)/2`, normalized;
    /// orthogonal to the bound state of the given `alpha < 0`.
    BoundOrthogonal { alpha: f64 },
}

/// Spherically symmetric initial state as an analytic radial profile plus
/// decay metadata used for quadrature tail bounds.
#[derive(Clone)]
pub struct RadialState {
    profile: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
    pub decay: DecayClass,
    pub preset: Option<Preset>,
    pub smoothness_note: String,
}

impl std::fmt::Debug for RadialState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialState")
            .field("decay", &self.decay)
            .field("preset", &self.preset)
            .finish()
    }
}

impl RadialState {
    pub fn from_profile(
        profile: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        decay: DecayClass,
        note: &str,
    ) -> Self {
        RadialState {
            profile: Arc::new(profile),
            decay,
            preset: None,
            smoothness_note: note.to_string(),
        }
    }

    /// Profile value `psi0(r)`.
    pub fn eval(&self, r: f64) -> Complex64 {
        (self.profile)(r)
    }

    pub fn scaled(&self, factor: Complex64) -> RadialState {
        let p = self.profile.clone();
        RadialState {
            profile: Arc::new(move |r| factor * p(r)),
            decay: self.decay,
            preset: None,
            smoothness_note: self.smoothness_note.clone(),
        }
    }

    pub fn superpose(&self, other: &RadialState, a: Complex64, b: Complex64) -> RadialState {
        let p = self.profile.clone();
        let q = other.profile.clone();
        // keep the slower decay of the two
        let decay = match (self.decay, other.decay) {
            (DecayClass::Exponential { rate: r1 }, DecayClass::Exponential { rate: r2 }) => {
                DecayClass::Exponential { rate: r1.min(r2) }
            }
            (DecayClass::Exponential { rate }, _) | (_, DecayClass::Exponential { rate }) => {
                DecayClass::Exponential { rate }
            }
            (DecayClass::Gaussian { rate: r1 }, DecayClass::Gaussian { rate: r2 }) => {
                DecayClass::Gaussian { rate: r1.min(r2) }
            }
            (DecayClass::Gaussian { rate }, _) | (_, DecayClass::Gaussian { rate }) => {
                DecayClass::Gaussian { rate }
            }
            (
                DecayClass::CompactSupport { support_end: s1 },
                DecayClass::CompactSupport { support_end: s2 },
            ) => DecayClass::CompactSupport {
                support_end: s1.max(s2),
            },
        };
        RadialState {
            profile: Arc::new(move |r| a * p(r) + b * q(r)),
            decay,
            preset: None,
            smoothness_note: "superposition".into(),
        }
    }
}

/// Build a normalized preset state.
pub fn make_preset_state(kind: Preset) -> Result<RadialState> {
    let (raw, decay, note): (Arc<dyn Fn(f64) -> Complex64 + Send + Sync>, _, &str) = match kind {
        Preset::Gaussian { sigma } => {
            if !(sigma > 0.0) {
                return Err(Error::Argument(format!(
                    "gaussian preset requires sigma > 0, got {sigma}"
                )));
            }
            (
                Arc::new(move |r: f64| Complex64::new((-r * r / (2.0 * sigma * sigma)).exp(), 0.0)),
                DecayClass::Gaussian {
                    rate: 1.0 / (2.0 * sigma * sigma),
                },
                "Schwartz-class Gaussian",
            )
        }
        Preset::ExponentialDecay => (
            Arc::new(|r: f64| Complex64::new((-r).exp(), 0.0)),
            DecayClass::Exponential { rate: 1.0 },
            "smooth for r > 0, kink at the origin",
        ),
        Preset::WProjectedExponential => (
            Arc::new(|r: f64| Complex64::new((-r).exp() * (1.0 - 0.5 * r), 0.0)),
            DecayClass::Exponential { rate: 1.0 },
            "exponential profile projected onto W",
        ),
        Preset::BoundOrthogonal { alpha } => {
            if !(alpha < 0.0) {
                return Err(Error::Argument(format!(
                    "bound_orthogonal preset requires alpha < 0, got {alpha}"
                )));
            }
            // <psi_alpha, psi0> ~ int e^{4 pi alpha r} r e^{-r}(1 + a r) dr = 0
            // with beta = -4 pi alpha:
            //   1/(1+beta)^2 + 2 a/(1+beta)^3 = 0  =>  a = -(1+beta)/2
            let beta = -4.0 * PI * alpha;
            let a = -(1.0 + beta) / 2.0;
            (
                Arc::new(move |r: f64| Complex64::new((-r).exp() * (1.0 + a * r), 0.0)),
                DecayClass::Exponential { rate: 1.0 },
                "exponential profile orthogonal to the bound state",
            )
        }
    };
    let mut state = RadialState {
        profile: raw,
        decay,
        preset: Some(kind),
        smoothness_note: note.to_string(),
    };
    let n = norm(&state);
    if !(n > 0.0) {
        return Err(Error::Argument("preset state has zero norm".into()));
    }
    let p = state.profile.clone();
    let inv = 1.0 / n;
    state.profile = Arc::new(move |r| inv * p(r));
    Ok(state)
}

fn radial_breakpoints(decay: DecayClass) -> Vec<f64> {
    let end = match decay {
        DecayClass::Exponential { rate } => 80.0 / rate,
        DecayClass::Gaussian { rate } => 12.0 / rate.sqrt(),
        DecayClass::CompactSupport { support_end } => support_end,
    };
    vec![0.0, end * 0.05, end * 0.2, end * 0.5, end]
}

/// `||psi0|| = sqrt(4 pi int |psi0(r)|^2 r^2 dr)`.
pub fn norm(state: &RadialState) -> f64 {
    let spec = QuadratureSpec::default().with_abs_tol(1e-13);
    let pts = radial_breakpoints(state.decay);
    let r2 = integrate_real(|r| state.eval(r).norm_sqr() * r * r, &pts, &spec);
    (4.0 * PI * r2.value.re).max(0.0).sqrt()
}

/// The W-membership integral `4 pi int_0^inf psi0(r) r dr` and the verdict
/// `|integral| < 10 * abs_tol`.  States in W are pseudo-orthogonal to the
/// resonance function `1/r`.
pub fn w_membership(state: &RadialState, quad: &QuadratureSpec) -> (QuadResult, bool) {
    let pts = radial_breakpoints(state.decay);
    let mut q = crate::numerics::integrate_complex(|r| state.eval(r) * r, &pts, quad);
    q.value *= 4.0 * PI;
    q.error_estimate *= 4.0 * PI;
    let in_w = q.value.norm() < 10.0 * quad.abs_tol.max(1e-9);
    (q, in_w)
}

/// Wave-function sample at one radius: value and radial derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveSample {
    pub value: Complex64,
    /// `d psi / dr` at the same point.
    pub derivative: Complex64,
}

impl WaveSample {
    pub fn zero() -> Self {
        WaveSample {
            value: Complex64::new(0.0, 0.0),
            derivative: Complex64::new(0.0, 0.0),
        }
    }

    pub fn add(self, other: WaveSample) -> WaveSample {
        WaveSample {
            value: self.value + other.value,
            derivative: self.derivative + other.derivative,
        }
    }
}

impl std::ops::Add for WaveSample {
    type Output = WaveSample;
    fn add(self, rhs: WaveSample) -> WaveSample {
        self.add(rhs)
    }
}

/// Portion of a sphere (or the full sphere) described purely by its solid
/// angle; valid because evolution is restricted to radial states, so the
/// flux is isotropic and the axis is metadata only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeSurface {
    pub solid_angle: f64,
    pub axis: [f64; 3],
}

impl ConeSurface {
    pub fn new(solid_angle: f64, axis: [f64; 3]) -> Result<Self> {
        if !(solid_angle > 0.0 && solid_angle <= 4.0 * PI + 1e-12) {
            return Err(Error::Argument(format!(
                "solid_angle must lie in (0, 4 pi], got {solid_angle}"
            )));
        }
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        if !(n > 0.0) {
            return Err(Error::Argument("axis must be nonzero".into()));
        }
        Ok(ConeSurface {
            solid_angle,
            axis: [axis[0] / n, axis[1] / n, axis[2] / n],
        })
    }

    pub fn full_sphere() -> Self {
        ConeSurface {
            solid_angle: 4.0 * PI,
            axis: [0.0, 0.0, 1.0],
        }
    }
}

/// Full configuration of an evolution run.
#[derive(Debug, Clone)]
pub struct EvolutionConfig {
    pub interaction: PointInteraction,
    pub state: RadialState,
    pub quad: QuadratureSpec,
    pub grid_r: Vec<f64>,
    pub grid_t: Vec<f64>,
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        self.quad.validate()?;
        for (name, grid) in [("grid.r", &self.grid_r), ("grid.t", &self.grid_t)] {
            if grid.is_empty() {
                return Err(Error::Argument(format!("{name} must be non-empty")));
            }
            if grid.iter().any(|&v| !(v > 0.0)) {
                return Err(Error::Argument(format!("{name} must be strictly positive")));
            }
            if grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Argument(format!(
                    "{name} must be strictly increasing"
                )));
            }
        }
        Ok(())
    }
}
