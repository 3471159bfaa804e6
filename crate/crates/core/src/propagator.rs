//! Time evolution by the explicit propagator: a leading large-time term plus
//! remainder integrals, per coupling regime.
//!
//! With `k* = x / 2t` and `ph = e^{i x^2 / 4t}` the decomposition reads
//!
//! ```text
//!   psi_t(x) = P + R1 + R2 + R3 + bound,
//!   P  = ph (2it)^{-3/2} psi_out(k*),
//!   R1 = ph (4 pi i t)^{-3/2} 4 pi int sinc(k* y) (e^{i y^2/4t} - 1) y^2 psi0 dy,
//!   R2 = ph (2it)^{-1/2} (2 pi)^{-3/2} (4 pi / x)
//!            int e^{i k* y} (e^{i y^2/4t} - 1) y psi0 dy,
//! ```
//!
//! and for `alpha > 0`
//!
//! ```text
//!   R3 = -2 alpha ph (4 pi i t)^{-1/2} (4 pi / x)
//!            int e^{i k* w} (e^{i w^2/4t} - 1) phi(w) dw,
//!   phi(w) = int_0^w s psi0(s) e^{-4 pi alpha (w - s)} ds.
//! ```
//!
//! For `alpha < 0` the decomposition follows from the reduced half-line
//! problem: radial evolution is `-d^2/dr^2` on `u = r psi` with the Robin
//! condition `u'(0) = c u(0)`, `c = 4 pi alpha`, whose kernel is
//!
//! ```text
//!   K = U0(r-s) + U0(r+s) - 2c e^{c(r+s)} e^{i c^2 t}
//!       + 2c int_0^inf e^{cu} U0(r+s-u) du        (c < 0),
//! ```
//!
//! the third piece being exactly `+ <psi_b, psi0> e^{i c^2 t} psi_b` after
//! pairing with the initial state.  The R2 slot holds `T3 - (P - P_free)`
//! with `T3` the `2 U0(x+y)` contribution (the R2 integral without the
//! kernel subtraction); the R3 slot holds the `u`-convolution, split at
//! `w = y - u = 0` into a closed Faddeeva-function part and a tail
//! convolution `chi(w) = int_w^inf e^{c(y-w)} y psi0(y) dy`.  The slot sums
//! still satisfy `psi_t = P + R1 + R2 + R3 + bound` exactly.
//!
//! All radial derivatives are analytic, never finite differences.

use crate::model::{Regime, WaveSample};
use crate::numerics::{
    dsinc, faddeeva, integrate_complex, sinc, DecayClass, QuadResult, QuadratureSpec,
};
use crate::spectral::{bound_term, OutgoingState, PREF};
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
/// `(2 pi)^{3/2}`.
const TPI32: f64 = 15.749_609_945_722_419;

/// `e^{i theta} - 1 = 2 i sin(theta/2) e^{i theta/2}`, free of cancellation
/// for small `theta`.
fn expm1i(theta: f64) -> Complex64 {
    let h = 0.5 * theta;
    let s = h.sin();
    c64(-2.0 * s * s, 2.0 * s * h.cos())
}

/// Radius beyond which the state's amplitude is negligible at working
/// precision, with headroom for the polynomial weights in the integrands.
fn state_cutoff(decay: DecayClass) -> f64 {
    match decay {
        DecayClass::Exponential { rate } => 60.0 / rate,
        DecayClass::Gaussian { rate } => 14.0 / rate.sqrt(),
        DecayClass::CompactSupport { support_end } => support_end,
    }
}

/// Integral of `f` over `[0, cutoff]` where the phase of `f` advances like
/// `k y + y^2 / 4t`: panels are pre-split to roughly one half-period each.
fn osc_radial<F: Fn(f64) -> Complex64>(
    f: F,
    k: f64,
    t: f64,
    cutoff: f64,
    spec: &QuadratureSpec,
) -> QuadResult {
    let mut pts = vec![0.0];
    let mut y = 0.0f64;
    while y < cutoff {
        let rate = k + y / (2.0 * t);
        y += (PI / rate.max(1e-12)).min(1.0);
        pts.push(y.min(cutoff));
    }
    integrate_complex(f, &pts, spec)
}

/// `phi(w) = int_0^w s psi0(s) e^{-beta (w - s)} ds` tabulated by an exact
/// integrating-factor recursion with Simpson increments, then cubic Hermite
/// interpolation (the slope `phi' = w psi0(w) - beta phi` is analytic).
struct PhiTable {
    h: f64,
    beta: f64,
    end: f64,
    vals: Vec<Complex64>,
    slopes: Vec<Complex64>,
}

fn build_phi(out: &OutgoingState, beta: f64) -> PhiTable {
    let end = state_cutoff(out.state.decay) + 40.0 / beta;
    let n = ((end / 0.005).ceil() as usize).max(4);
    let h = end / n as f64;
    // s = 0 guard: s psi0(s) extends continuously to the origin even for
    // profiles with a 1/s singularity
    let g = |s: f64| {
        let s = s.max(1e-12);
        s * out.state.eval(s)
    };
    let full = (-beta * h).exp();
    let half = (-beta * h * 0.5).exp();
    let mut vals = Vec::with_capacity(n + 1);
    let mut slopes = Vec::with_capacity(n + 1);
    let mut phi = c64(0.0, 0.0);
    vals.push(phi);
    slopes.push(g(0.0));
    for i in 0..n {
        let w = i as f64 * h;
        let inc = h / 6.0 * (full * g(w) + 4.0 * half * g(w + 0.5 * h) + g(w + h));
        phi = phi * full + inc;
        vals.push(phi);
        slopes.push(g(w + h) - beta * phi);
    }
    PhiTable {
        h,
        beta,
        end,
        vals,
        slopes,
    }
}

/// `chi(w) = int_w^inf e^{c (y - w)} y psi0(y) dy` for `c < 0`, tabulated by
/// a backward integrating-factor recursion (`chi' = -w psi0(w) - c chi`).
fn build_chi(out: &OutgoingState, c: f64) -> PhiTable {
    let end = state_cutoff(out.state.decay);
    let n = ((end / 0.005).ceil() as usize).max(4);
    let h = end / n as f64;
    let g = |s: f64| {
        let s = s.max(1e-12);
        s * out.state.eval(s)
    };
    let full = (c * h).exp();
    let half = (c * h * 0.5).exp();
    let mut vals = vec![c64(0.0, 0.0); n + 1];
    let mut slopes = vec![c64(0.0, 0.0); n + 1];
    let mut chi = c64(0.0, 0.0); // negligible beyond the state cutoff
    slopes[n] = -g(end) - c * chi;
    for i in (0..n).rev() {
        let w = i as f64 * h;
        let inc = h / 6.0 * (g(w) + 4.0 * half * g(w + 0.5 * h) + full * g(w + h));
        chi = chi * full + inc;
        vals[i] = chi;
        slopes[i] = -g(w) - c * chi;
    }
    PhiTable {
        h,
        beta: -c,
        end,
        vals,
        slopes,
    }
}

impl PhiTable {
    fn eval(&self, w: f64) -> Complex64 {
        if w <= 0.0 {
            return c64(0.0, 0.0);
        }
        if w >= self.end {
            // past the state's support phi decays as a pure exponential
            return self.vals[self.vals.len() - 1] * (-self.beta * (w - self.end)).exp();
        }
        let i = ((w / self.h) as usize).min(self.vals.len() - 2);
        let s = w / self.h - i as f64;
        let s2 = s * s;
        let s3 = s2 * s;
        self.vals[i] * (2.0 * s3 - 3.0 * s2 + 1.0)
            + self.slopes[i] * (self.h * (s3 - 2.0 * s2 + s))
            + self.vals[i + 1] * (-2.0 * s3 + 3.0 * s2)
            + self.slopes[i + 1] * (self.h * (s3 - s2))
    }
}

/// All decomposition terms with their radial derivatives, plus the leading
/// flux amplitude used by the divergence analysis.
#[derive(Debug, Clone, Copy)]
pub struct PropagatorDecomposition {
    pub p: Complex64,
    /// Gradient correction `Q` with `grad P = i k* P + Q`.
    pub q: Complex64,
    pub grad_p: Complex64,
    pub r1: Complex64,
    pub grad_r1: Complex64,
    pub r2: Complex64,
    pub grad_r2: Complex64,
    pub r3: Complex64,
    pub grad_r3: Complex64,
    pub bound: Complex64,
    pub grad_bound: Complex64,
    /// Radial component of the leading current amplitude: `A0 . omega` at the
    /// resonance, `A_alpha . omega` otherwise.
    pub amplitude: Complex64,
    pub quad_error: f64,
    pub converged: bool,
}

impl PropagatorDecomposition {
    pub fn value(&self) -> Complex64 {
        self.p + self.r1 + self.r2 + self.r3 + self.bound
    }

    pub fn radial_derivative(&self) -> Complex64 {
        self.grad_p + self.grad_r1 + self.grad_r2 + self.grad_r3 + self.grad_bound
    }

    pub fn sample(&self) -> WaveSample {
        WaveSample {
            value: self.value(),
            derivative: self.radial_derivative(),
        }
    }
}

/// One evolved point with its full decomposition.
#[derive(Debug, Clone, Copy)]
pub struct PropagatedSample {
    pub position_radius: f64,
    pub time: f64,
    pub value: Complex64,
    pub radial_derivative: Complex64,
    pub decomposition: PropagatorDecomposition,
    pub quad_error: f64,
}

struct ErrAcc {
    err: f64,
    conv: bool,
}

impl ErrAcc {
    fn new() -> Self {
        ErrAcc {
            err: 0.0,
            conv: true,
        }
    }
    fn add(&mut self, q: &QuadResult, scale: f64) {
        self.err += q.error_estimate * scale;
        self.conv &= q.converged;
    }
}

fn check_args(x: f64, t: f64) -> Result<()> {
    if !(x > 0.0) {
        return Err(Error::Argument(format!("radius must be > 0, got {x}")));
    }
    if !(t > 0.0) {
        return Err(Error::Argument(format!(
            "propagator form needs t > 0, got {t}"
        )));
    }
    Ok(())
}

/// `(R1, grad R1, quadrature results)` shared by free and full evolution.
fn r1_term(
    out: &OutgoingState,
    x: f64,
    t: f64,
) -> Result<(Complex64, Complex64, QuadResult, QuadResult)> {
    let k = x / (2.0 * t);
    let ph = c64(0.0, x * x / (4.0 * t)).exp();
    let c32p = ph * Complex64::from_polar((4.0 * PI * t).powf(-1.5), -3.0 * FRAC_PI_4);
    let cut = state_cutoff(out.state.decay);
    let spec = out.quad;
    let i1 = osc_radial(
        |y| sinc(k * y) * expm1i(y * y / (4.0 * t)) * y * y * out.state.eval(y),
        k,
        t,
        cut,
        &spec,
    );
    let i1g = osc_radial(
        |y| (y / (2.0 * t)) * dsinc(k * y) * expm1i(y * y / (4.0 * t)) * y * y * out.state.eval(y),
        k,
        t,
        cut,
        &spec,
    );
    let r1 = c32p * 4.0 * PI * i1.value;
    let grad_r1 = I * k * r1 + c32p * 4.0 * PI * i1g.value;
    Ok((r1, grad_r1, i1, i1g))
}

/// Free leading term `P_free = ph (2it)^{-3/2} psi_hat_0(k*)` and its
/// gradient.
fn free_leading(out: &OutgoingState, x: f64, t: f64) -> Result<(Complex64, Complex64)> {
    let k = x / (2.0 * t);
    let ph = c64(0.0, x * x / (4.0 * t)).exp();
    let c32 = ph * Complex64::from_polar((2.0 * t).powf(-1.5), -3.0 * FRAC_PI_4);
    let (s0, ds0) = out.s0_direct(k)?;
    let p = c32 * PREF * s0;
    let grad = I * k * p + c32 * PREF * ds0 / (2.0 * t);
    Ok((p, grad))
}

/// Free evolution `P_free + R1`, exact for the Laplacian without interaction.
pub fn free_evolve(out: &OutgoingState, x: f64, t: f64) -> Result<WaveSample> {
    check_args(x, t)?;
    let (p, gp) = free_leading(out, x, t)?;
    let (r1, gr1, _, _) = r1_term(out, x, t)?;
    Ok(WaveSample {
        value: p + r1,
        derivative: gp + gr1,
    })
}

/// Full decomposition at one `(x, t)`.
pub fn decomposition(out: &OutgoingState, x: f64, t: f64) -> Result<PropagatorDecomposition> {
    check_args(x, t)?;
    let alpha = out.interaction.alpha;
    let k = x / (2.0 * t);
    let ph = c64(0.0, x * x / (4.0 * t)).exp();
    let c32 = ph * Complex64::from_polar((2.0 * t).powf(-1.5), -3.0 * FRAC_PI_4);
    let c12p = ph * Complex64::from_polar((4.0 * PI * t).powf(-0.5), -FRAC_PI_4);
    // ph (2it)^{-1/2} (2 pi)^{-3/2} / x, the spherical-wave prefactor
    let pre2 = ph * Complex64::from_polar((2.0 * t).powf(-0.5), -FRAC_PI_4) / (TPI32 * x);
    let cut = state_cutoff(out.state.decay);
    let spec = out.quad;
    let mut acc = ErrAcc::new();

    // leading term
    let psi = out.value(k)?;
    let dpsi = out.derivative(k)?;
    let p = c32 * psi;
    let q = c32 * dpsi / (2.0 * t);
    let grad_p = I * k * p + q;

    let (r1, grad_r1, i1, i1g) = r1_term(out, x, t)?;
    let c32p_abs = (4.0 * PI * t).powf(-1.5) * 4.0 * PI;
    acc.add(&i1, c32p_abs);
    acc.add(&i1g, c32p_abs);

    // R2 and its gradient integral, shared by all regimes
    let i2 = osc_radial(
        |y| c64(0.0, k * y).exp() * expm1i(y * y / (4.0 * t)) * y * out.state.eval(y),
        k,
        t,
        cut,
        &spec,
    );
    let i2g = osc_radial(
        |y| {
            I * (y / (2.0 * t))
                * c64(0.0, k * y).exp()
                * expm1i(y * y / (4.0 * t))
                * y
                * out.state.eval(y)
        },
        k,
        t,
        cut,
        &spec,
    );
    let pre2_abs = pre2.norm() * 4.0 * PI;
    acc.add(&i2, pre2_abs);
    acc.add(&i2g, pre2_abs);
    let r2_plain = pre2 * 4.0 * PI * i2.value;
    let grad_r2_plain = I * k * r2_plain - r2_plain / x + pre2 * 4.0 * PI * i2g.value;

    let (r2, grad_r2, r3, grad_r3, bound, grad_bound) = match out.interaction.regime() {
        Regime::Resonant => {
            let z = c64(0.0, 0.0);
            (r2_plain, grad_r2_plain, z, z, z, z)
        }
        Regime::Positive => {
            let beta = 4.0 * PI * alpha;
            let phi = build_phi(out, beta);
            let i3 = osc_radial(
                |w| c64(0.0, k * w).exp() * expm1i(w * w / (4.0 * t)) * phi.eval(w),
                k,
                t,
                phi.end,
                &spec,
            );
            let i3g = osc_radial(
                |w| {
                    I * (w / (2.0 * t))
                        * c64(0.0, k * w).exp()
                        * expm1i(w * w / (4.0 * t))
                        * phi.eval(w)
                },
                k,
                t,
                phi.end,
                &spec,
            );
            let c3 = -2.0 * alpha * c12p / x;
            acc.add(&i3, c3.norm() * 4.0 * PI);
            acc.add(&i3g, c3.norm() * 4.0 * PI);
            let r3 = c3 * 4.0 * PI * i3.value;
            let grad_r3 = I * k * r3 - r3 / x + c3 * 4.0 * PI * i3g.value;
            let z = c64(0.0, 0.0);
            (r2_plain, grad_r2_plain, r3, grad_r3, z, z)
        }
        Regime::Negative => {
            // T3 differs from R2 only by the "-1" in the kernel, whose
            // contribution is the transform E(k*)
            let e_k = out.e_direct(k)?;
            let de_k = out.e_prime_direct(k)?;
            let t3 = r2_plain + pre2 * 4.0 * PI * e_k;
            let grad_t3 =
                I * k * t3 - t3 / x + pre2 * 4.0 * PI * (i2g.value + de_k / (2.0 * t));
            let (p_free, grad_p_free) = free_leading(out, x, t)?;
            let r2 = t3 - (p - p_free);
            let grad_r2 = grad_t3 - (grad_p - grad_p_free);

            // convolution term (2c/x) int_0^inf e^{cu} U0(x + y - u) du
            // paired with u0 = y psi0: split at w = y - u = 0.  The w < 0
            // part is L e^{-cw} with L = int_0^inf e^{cy} y psi0 dy and has
            // the closed form
            //   A = (2cL/x) [e^{cx + i c^2 t} - e^{i x^2/4t} w(z)/2],
            //   z = e^{i pi/4} (x + 2ict) / (2 sqrt t),
            // while the w > 0 part is the chi tail convolution.
            let c = 4.0 * PI * alpha;
            let lq = integrate_complex(
                |y| (c * y).exp() * y * out.state.eval(y),
                &[0.0, 0.2 * cut, cut],
                &spec,
            );
            acc.add(&lq, 2.0 * c.abs() / x);
            let l = lq.value;
            let rot = Complex64::from_polar(1.0, FRAC_PI_4);
            let z = rot * c64(x, 2.0 * c * t) / (2.0 * t.sqrt());
            let wz = faddeeva(z)?;
            let eb = (c * x).exp() * c64(0.0, c * c * t).exp();
            let ca = 2.0 * c * l / x;
            let a_term = ca * (eb - 0.5 * ph * wz);
            // w'(z) = -2 z w(z) + 2i/sqrt(pi)
            let dwdx = (-2.0 * z * wz + 2.0 * I / PI.sqrt()) * rot / (2.0 * t.sqrt());
            let grad_a =
                -a_term / x + ca * (c * eb - 0.5 * (I * k * ph * wz + ph * dwdx));

            let chi = build_chi(out, c);
            let cb = 2.0 * c / x * ph
                * Complex64::from_polar((4.0 * PI * t).powf(-0.5), -FRAC_PI_4);
            let jb = osc_radial(
                |w| c64(0.0, k * w).exp() * c64(0.0, w * w / (4.0 * t)).exp() * chi.eval(w),
                k,
                t,
                chi.end,
                &spec,
            );
            let jbg = osc_radial(
                |w| {
                    I * (w / (2.0 * t))
                        * c64(0.0, k * w).exp()
                        * c64(0.0, w * w / (4.0 * t)).exp()
                        * chi.eval(w)
                },
                k,
                t,
                chi.end,
                &spec,
            );
            acc.add(&jb, cb.norm());
            acc.add(&jbg, cb.norm());
            let b_term = cb * jb.value;
            let grad_b = I * k * b_term - b_term / x + cb * jbg.value;

            let r3 = a_term + b_term;
            let grad_r3 = grad_a + grad_b;
            let bt = bound_term(&out.interaction, out.bound_overlap()?, x, t);
            (r2, grad_r2, r3, grad_r3, bt.value, bt.derivative)
        }
    };

    let amplitude = leading_amplitude(out, x, t)?;

    Ok(PropagatorDecomposition {
        p,
        q,
        grad_p,
        r1,
        grad_r1,
        r2,
        grad_r2,
        r3,
        grad_r3,
        bound,
        grad_bound,
        amplitude,
        quad_error: acc.err.max(spec.abs_tol),
        converged: acc.conv,
    })
}

/// Radial component of the leading current amplitude:
///
/// ```text
///   alpha  = 0:  A0 . omega      = (2 pi)^{-3} |4 pi E(x/2t)|^2 / (2 t x^3)
///   alpha != 0:  A_alpha . omega = (i / t^4) |4 pi E(x/t)|^2
///                                    / ((alpha + i x/t)(alpha - i x/t)^2)
/// ```
pub fn leading_amplitude(out: &OutgoingState, x: f64, t: f64) -> Result<Complex64> {
    check_args(x, t)?;
    if out.interaction.alpha == 0.0 {
        let e = out.e_direct(x / (2.0 * t))?;
        let f2 = (4.0 * PI * e).norm_sqr();
        Ok(c64(
            f2 / ((2.0 * PI).powi(3) * 2.0 * t * x * x * x),
            0.0,
        ))
    } else {
        let s = x / t;
        let alpha = out.interaction.alpha;
        let e = out.e_direct(s)?;
        let f2 = (4.0 * PI * e).norm_sqr();
        let d1 = c64(alpha, s);
        let d2 = c64(alpha, -s);
        Ok(I * f2 / (t.powi(4) * d1 * d2 * d2))
    }
}

/// Evolve one point by the propagator decomposition.
pub fn evolve(out: &OutgoingState, x: f64, t: f64) -> Result<PropagatedSample> {
    let d = decomposition(out, x, t)?;
    Ok(PropagatedSample {
        position_radius: x,
        time: t,
        value: d.value(),
        radial_derivative: d.radial_derivative(),
        decomposition: d,
        quad_error: d.quad_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_preset_state, PointInteraction, Preset, RadialState};
    use crate::spectral::{spectral_evolve, spectral_evolve_full};

    fn out_for(alpha: f64, state: RadialState) -> OutgoingState {
        OutgoingState::new(
            PointInteraction::at_origin(alpha).unwrap(),
            state,
            QuadratureSpec::default(),
        )
        .unwrap()
    }

    #[test]
    fn free_gaussian_matches_closed_form() {
        // psi0 = N e^{-r^2/2} evolves freely to
        // N (1/(1 + 2it))^{3/2} e^{-x^2 / (2 (1 + 2it))}
        let state = make_preset_state(Preset::Gaussian { sigma: 1.0 }).unwrap();
        let n = state.eval(0.0);
        let out = out_for(0.0, state);
        for &(x, t) in &[(0.5, 0.5), (2.0, 1.0), (6.0, 3.0), (1.0, 10.0)] {
            let got = free_evolve(&out, x, t).unwrap();
            let sig = c64(1.0, 2.0 * t);
            let want = n * (1.0 / sig).powf(1.5) * (-x * x / (2.0 * sig)).exp();
            let dwant = want * (-x / sig);
            assert!(
                (got.value - want).norm() < 1e-8,
                "value at ({x},{t}): {} vs {}",
                got.value,
                want
            );
            assert!(
                (got.derivative - dwant).norm() < 1e-8,
                "derivative at ({x},{t}): {} vs {}",
                got.derivative,
                dwant
            );
        }
    }

    #[test]
    fn matches_spectral_at_resonance() {
        let out = out_for(0.0, make_preset_state(Preset::ExponentialDecay).unwrap());
        for &(x, t) in &[(3.0, 1.0), (8.0, 2.0)] {
            let prop = evolve(&out, x, t).unwrap();
            let spec = spectral_evolve(&out, x, t).unwrap();
            assert!(
                (prop.value - spec.value).norm() < 1e-6,
                "value at ({x},{t}): {} vs {}",
                prop.value,
                spec.value
            );
            assert!(
                (prop.radial_derivative - spec.derivative).norm() < 1e-5,
                "derivative at ({x},{t})"
            );
        }
    }

    #[test]
    fn matches_spectral_at_positive_coupling() {
        let out = out_for(1.0, make_preset_state(Preset::Gaussian { sigma: 1.0 }).unwrap());
        for &(x, t) in &[(4.0, 2.0), (2.0, 1.0)] {
            let prop = evolve(&out, x, t).unwrap();
            let spec = spectral_evolve(&out, x, t).unwrap();
            assert!(
                (prop.value - spec.value).norm() < 1e-6,
                "value at ({x},{t}): {} vs {}",
                prop.value,
                spec.value
            );
            assert!(
                (prop.radial_derivative - spec.derivative).norm() < 1e-5,
                "derivative at ({x},{t})"
            );
        }
    }

    #[test]
    fn matches_spectral_at_negative_coupling() {
        let alpha = -1.0 / (4.0 * PI);
        let out = out_for(alpha, make_preset_state(Preset::Gaussian { sigma: 1.0 }).unwrap());
        for &(x, t) in &[(4.0, 2.0), (2.0, 1.0)] {
            let prop = evolve(&out, x, t).unwrap();
            let spec = spectral_evolve_full(&out, x, t).unwrap();
            assert!(
                (prop.value - spec.value).norm() < 1e-6,
                "value at ({x},{t}): {} vs {}",
                prop.value,
                spec.value
            );
            assert!(
                (prop.radial_derivative - spec.derivative).norm() < 1e-5,
                "derivative at ({x},{t})"
            );
        }
    }

    #[test]
    fn bound_state_evolves_by_pure_phase() {
        let alpha = -1.0 / (4.0 * PI);
        let p = PointInteraction::at_origin(alpha).unwrap();
        let beta = -4.0 * PI * alpha;
        let state = RadialState::from_profile(
            move |r| c64(p.bound_state(r.max(1e-300)).unwrap(), 0.0),
            DecayClass::Exponential { rate: beta },
            "bound state",
        );
        let out = out_for(alpha, state);
        // eigenvalue -(4 pi alpha)^2 = -1, so psi_t = e^{it} psi_b
        for &(r, t) in &[(1.0, 1.0), (2.0, 3.0), (5.0, 10.0)] {
            let got = evolve(&out, r, t).unwrap();
            let want = c64(0.0, t).exp() * p.bound_state(r).unwrap();
            let dwant = want * (4.0 * PI * alpha - 1.0 / r);
            assert!(
                (got.value - want).norm() < 1e-5,
                "value at ({r},{t}): {} vs {}",
                got.value,
                want
            );
            assert!(
                (got.radial_derivative - dwant).norm() < 1e-4,
                "derivative at ({r},{t})"
            );
        }
    }

    #[test]
    fn term_gradients_match_finite_differences() {
        for &alpha in &[0.0, 1.0, -1.0 / (4.0 * PI)] {
            let out = out_for(alpha, make_preset_state(Preset::Gaussian { sigma: 1.0 }).unwrap());
            let (x, t) = (3.0, 1.5);
            let h = 1e-4;
            let d = decomposition(&out, x, t).unwrap();
            let dp = decomposition(&out, x + h, t).unwrap();
            let dm = decomposition(&out, x - h, t).unwrap();
            let checks = [
                ("p", d.grad_p, (dp.p - dm.p) / (2.0 * h)),
                ("r1", d.grad_r1, (dp.r1 - dm.r1) / (2.0 * h)),
                ("r2", d.grad_r2, (dp.r2 - dm.r2) / (2.0 * h)),
                ("r3", d.grad_r3, (dp.r3 - dm.r3) / (2.0 * h)),
                ("bound", d.grad_bound, (dp.bound - dm.bound) / (2.0 * h)),
            ];
            for (name, got, fd) in checks {
                assert!(
                    (got - fd).norm() < 1e-5 * (1.0 + fd.norm()),
                    "alpha {alpha} term {name}: {got} vs fd {fd}"
                );
            }
        }
    }

    #[test]
    fn phi_table_matches_closed_form() {
        // psi0 = e^{-s}: phi(w) = e^{-bw} int_0^w s e^{(b-1)s} ds with b = 2
        let state = RadialState::from_profile(
            |r| c64((-r).exp(), 0.0),
            DecayClass::Exponential { rate: 1.0 },
            "bare exponential",
        );
        let out = out_for(1.0, state);
        let beta = 2.0f64;
        let phi = build_phi(&out, beta);
        let a = beta - 1.0;
        for &w in &[0.5, 2.0, 7.0, 20.0] {
            let inner = ((a * w).exp() * (w / a - 1.0 / (a * a)) + 1.0 / (a * a)) * (-beta * w).exp();
            assert!(
                (phi.eval(w) - c64(inner, 0.0)).norm() < 1e-9,
                "w = {w}: {} vs {}",
                phi.eval(w),
                inner
            );
        }
    }

    #[test]
    fn resonant_amplitude_closed_form() {
        // exponential preset: E(k) = N / (1 - ik)^2 with N = 1/sqrt(pi)
        let out = out_for(0.0, make_preset_state(Preset::ExponentialDecay).unwrap());
        let (x, t) = (6.0, 1.5);
        let k = x / (2.0 * t);
        let n = 1.0 / PI.sqrt();
        let e2 = (n / (1.0 + k * k)).powi(2); // |1/(1-ik)^2|^2 = 1/(1+k^2)^2
        let want = (4.0 * PI).powi(2) * e2 / ((2.0 * PI).powi(3) * 2.0 * t * x * x * x);
        let got = leading_amplitude(&out, x, t).unwrap();
        assert!((got.re - want).abs() < 1e-10 * want, "{} vs {}", got.re, want);
        assert_eq!(got.im, 0.0);
    }

    #[test]
    fn coupled_amplitude_magnitude() {
        // |A_alpha . omega| = |4 pi E(x/t)|^2 / (t^4 (alpha^2 + (x/t)^2)^{3/2})
        let out = out_for(1.0, make_preset_state(Preset::Gaussian { sigma: 1.0 }).unwrap());
        let (x, t) = (5.0, 2.0);
        let s = x / t;
        let e = out.e_direct(s).unwrap();
        let want = (4.0 * PI * e).norm_sqr() / (t.powi(4) * (1.0 + s * s).powf(1.5));
        let got = leading_amplitude(&out, x, t).unwrap();
        assert!(
            (got.norm() - want).abs() < 1e-12 * want,
            "{} vs {}",
            got.norm(),
            want
        );
    }
}
