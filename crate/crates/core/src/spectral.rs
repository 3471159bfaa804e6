//! Generalized-eigenfunction route: scattering eigenfunctions, the outgoing
//! momentum representation of a radial state, and time evolution by the
//! spectral formula
//!
//! ```text
//!   psi_t(x) = (2 pi)^{-3/2} int e^{-i k^2 t} Phi_+(x, k) psi_out(k) d^3k
//! ```
//!
//! with `Phi_+(x, k) = e^{i k.x} + e^{-i|k| x} / ((4 pi alpha + i|k|) x)`.
//!
//! Everything reduces to one-dimensional integrals of two radial transforms,
//!
//! ```text
//!   E(k)  = int_0^inf e^{i k y} y psi0(y) dy,
//!   S0(k) = int_0^inf sinc(k y) y^2 psi0(y) dy = (E(k) - E(-k)) / (2 i k),
//! ```
//!
//! so that `psi_out(k) = sqrt(2/pi) [S0(k) + E(k) / (4 pi alpha - i k)]`.
//! At `alpha = 0` the second term is singular at `k = 0` unless `E(0) = 0`
//! (the subspace W); all integrands used for evolution are assembled in
//! algebraically regularized form so the resonance never causes cancellation.
//!
//! `E` and its first two derivatives are tabulated on a graded grid and
//! interpolated by cubic Hermite segments; near `k = 0` a moment series takes
//! over.  The direct quadrature path (`value`, `derivative`) bypasses the
//! table so the two can be cross-checked.

use crate::model::{PointInteraction, RadialState, Regime, WaveSample};
use crate::numerics::{
    dsinc, faddeeva, integrate_complex, integrate_oscillatory, sinc, DecayClass, Domain,
    OscillationStrategy, QuadratureSpec,
};
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::{OnceLock, RwLock};

/// `sqrt(2/pi) = 4 pi (2 pi)^{-3/2}`; the prefactor carried by every radial
/// momentum transform.
pub(crate) const PREF: f64 = 0.797_884_560_802_865_4;
/// Below this |k| the moment series replaces quadrature and interpolation.
const K_SERIES: f64 = 0.08;
/// Hard cap on the tabulated/integrated momentum range.
const K_CAP: f64 = 4000.0;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Scattering eigenfunction `psi_{alpha,y}(x, k)` for a point interaction at
/// `y`:
///
/// ```text
///   e^{i k.x} + e^{i k.y} / (4 pi alpha - i|k|) * e^{i|k| |x-y|} / |x-y|
/// ```
pub fn eigenfunction_value(p: &PointInteraction, x: [f64; 3], k: [f64; 3]) -> Result<Complex64> {
    let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
    let d = [x[0] - p.center[0], x[1] - p.center[1], x[2] - p.center[2]];
    let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    if r == 0.0 {
        return Err(Error::Singularity(
            "eigenfunction evaluated at the interaction center".into(),
        ));
    }
    let denom = c64(4.0 * PI * p.alpha, -kn);
    if denom.norm() == 0.0 {
        return Err(Error::Singularity(
            "zero-energy eigenfunction at alpha = 0 is singular".into(),
        ));
    }
    let kx = k[0] * x[0] + k[1] * x[1] + k[2] * x[2];
    let ky = k[0] * p.center[0] + k[1] * p.center[1] + k[2] * p.center[2];
    let plane = c64(0.0, kx).exp();
    let spherical = c64(0.0, ky).exp() / denom * c64(0.0, kn * r).exp() / r;
    Ok(plane + spherical)
}

/// Cubic Hermite value on `[x0, x1]` from endpoint values and derivatives.
fn hermite(x: f64, x0: f64, x1: f64, f0: Complex64, f1: Complex64, d0: Complex64, d1: Complex64) -> Complex64 {
    let h = x1 - x0;
    let s = (x - x0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    f0 * h00 + d0 * (h * h10) + f1 * h01 + d1 * (h * h11)
}

/// Tabulated `E`, `E'`, `E''` on a graded nonnegative grid, and the same for
/// the reflected transform `E(-k)` when the profile is not real-valued.
struct ProfileTable {
    k: Vec<f64>,
    e: Vec<Complex64>,
    de: Vec<Complex64>,
    dde: Vec<Complex64>,
    /// `E(-k)` and its k-derivatives; empty when the profile is real (then
    /// `E(-k) = conj(E(k))`).
    em: Vec<Complex64>,
    dem: Vec<Complex64>,
    ddem: Vec<Complex64>,
}

impl ProfileTable {
    fn k_max(&self) -> f64 {
        self.k.last().copied().unwrap_or(0.0)
    }

    fn segment(&self, k: f64) -> usize {
        debug_assert!(k >= 0.0 && k <= self.k_max());
        let i = self.k.partition_point(|&v| v <= k);
        i.clamp(1, self.k.len() - 1) - 1
    }

    /// `(E(k), E'(k), E(-k), E'(-k))` for `k >= 0`.
    fn eval(&self, k: f64, real_profile: bool) -> (Complex64, Complex64, Complex64, Complex64) {
        let i = self.segment(k);
        let (x0, x1) = (self.k[i], self.k[i + 1]);
        let e = hermite(k, x0, x1, self.e[i], self.e[i + 1], self.de[i], self.de[i + 1]);
        let de = hermite(k, x0, x1, self.de[i], self.de[i + 1], self.dde[i], self.dde[i + 1]);
        if real_profile {
            // E(-k) = conj E(k) implies E'(-k) = -conj E'(k)
            (e, de, e.conj(), -de.conj())
        } else {
            let em = hermite(k, x0, x1, self.em[i], self.em[i + 1], self.dem[i], self.dem[i + 1]);
            let dem =
                hermite(k, x0, x1, self.dem[i], self.dem[i + 1], self.ddem[i], self.ddem[i + 1]);
            // stored dem is d/dk E(-k) = -E'(-k)
            (e, de, em, -dem)
        }
    }
}

/// The outgoing momentum representation of an initial state under a point
/// interaction, with direct-quadrature and tabulated evaluation paths.
pub struct OutgoingState {
    pub interaction: PointInteraction,
    pub state: RadialState,
    pub quad: QuadratureSpec,
    real_profile: bool,
    moments: OnceLock<[Complex64; 14]>,
    bound_overlap_cache: OnceLock<Complex64>,
    table: RwLock<Option<ProfileTable>>,
}

/// `a` (plane-wave part) and `b` (spherical-wave part) of the spectral
/// evolution, each with its radial derivative.
#[derive(Debug, Clone, Copy)]
pub struct SpectralParts {
    pub a: WaveSample,
    pub b: WaveSample,
    pub converged: bool,
}

impl OutgoingState {
    pub fn new(interaction: PointInteraction, state: RadialState, quad: QuadratureSpec) -> Result<Self> {
        quad.validate()?;
        // detect real-valued profiles so E(-k) can reuse conj(E(k))
        let mut real = true;
        for i in 0..=32 {
            let r = 0.25 + 1.5 * i as f64;
            let v = state.eval(r);
            if v.im.abs() > 1e-14 * (1.0 + v.re.abs()) {
                real = false;
                break;
            }
        }
        Ok(OutgoingState {
            interaction,
            state,
            quad,
            real_profile: real,
            moments: OnceLock::new(),
            bound_overlap_cache: OnceLock::new(),
            table: RwLock::new(None),
        })
    }

    fn radial_pts(&self) -> Vec<f64> {
        let end = match self.state.decay {
            DecayClass::Exponential { rate } => 120.0 / rate,
            DecayClass::Gaussian { rate } => 15.0 / rate.sqrt(),
            DecayClass::CompactSupport { support_end } => support_end,
        };
        vec![0.0, end * 0.02, end * 0.1, end * 0.3, end * 0.6, end]
    }

    /// Moments `M_j = int_0^inf y^j psi0(y) dy`, j = 0..13.
    fn moments(&self) -> &[Complex64; 14] {
        self.moments.get_or_init(|| {
            let spec = self.quad.with_abs_tol(1e-13);
            let pts = self.radial_pts();
            let mut m = [c64(0.0, 0.0); 14];
            for (j, slot) in m.iter_mut().enumerate() {
                let q = integrate_complex(|y| y.powi(j as i32) * self.state.eval(y), &pts, &spec);
                *slot = q.value;
            }
            m
        })
    }

    fn series_e(&self, k: f64) -> (Complex64, Complex64) {
        let m = self.moments();
        let ik = c64(0.0, k);
        let mut e = c64(0.0, 0.0);
        let mut de = c64(0.0, 0.0);
        let mut pow = c64(1.0, 0.0); // (ik)^n / n!
        let mut dpow = c64(0.0, 0.0); // derivative of the previous
        for n in 0..=12 {
            e += pow * m[n + 1];
            de += dpow * m[n + 1];
            dpow = pow * I; // i (ik)^n / n! = d/dk (ik)^{n+1}/(n+1)!
            pow = pow * ik / (n as f64 + 1.0);
        }
        (e, de)
    }

    fn series_s0(&self, k: f64) -> (Complex64, Complex64) {
        let m = self.moments();
        let k2 = k * k;
        let mut s0 = c64(0.0, 0.0);
        let mut ds0 = c64(0.0, 0.0);
        let mut coeff = 1.0; // (-1)^n / (2n+1)!
        let mut kpow = 1.0; // k^{2n}
        for n in 0..=5 {
            s0 += coeff * kpow * m[2 * n + 2];
            if n > 0 {
                ds0 += coeff * (2 * n) as f64 * kpow / k.max(1e-300) * m[2 * n + 2];
            }
            coeff *= -1.0 / ((2 * n + 2) as f64 * (2 * n + 3) as f64);
            kpow *= k2;
        }
        (s0, ds0)
    }

    /// Direct-quadrature `E(k)` (any real `k`).
    pub(crate) fn e_direct(&self, k: f64) -> Result<Complex64> {
        if k.abs() <= K_SERIES {
            return Ok(self.series_e(k).0);
        }
        let r = integrate_oscillatory(
            |y| y * self.state.eval(y),
            k,
            Domain::SemiInfinite(0.0),
            self.state.decay,
            &self.quad,
        )?;
        Ok(r.value)
    }

    /// Direct-quadrature `E'(k)`.
    pub(crate) fn e_prime_direct(&self, k: f64) -> Result<Complex64> {
        if k.abs() <= K_SERIES {
            return Ok(self.series_e(k).1);
        }
        let r = integrate_oscillatory(
            |y| I * y * y * self.state.eval(y),
            k,
            Domain::SemiInfinite(0.0),
            self.state.decay,
            &self.quad,
        )?;
        Ok(r.value)
    }

    /// Direct-quadrature `(S0(k), S0'(k))` for `k >= 0`.
    pub(crate) fn s0_direct(&self, k: f64) -> Result<(Complex64, Complex64)> {
        if k <= K_SERIES {
            return Ok(self.series_s0(k));
        }
        let ep = self.e_direct(k)?;
        let em = self.e_direct(-k)?;
        let dp = self.e_prime_direct(k)?;
        let dm = self.e_prime_direct(-k)?;
        let tik = c64(0.0, 2.0 * k);
        let s0 = (ep - em) / tik;
        let ds0 = (dp + dm) / tik - (ep - em) / (tik * k);
        Ok((s0, ds0))
    }

    /// Outgoing transform `psi_out(k)`, direct quadrature, `k > 0` (also
    /// `k = 0` away from the resonance or inside W).
    pub fn value(&self, k: f64) -> Result<Complex64> {
        if !(k >= 0.0) {
            return Err(Error::Argument(format!("momentum must be >= 0, got {k}")));
        }
        let denom = c64(4.0 * PI * self.interaction.alpha, -k);
        if denom.norm() < 1e-300 {
            let e0 = self.series_e(0.0).0;
            if e0.norm() < 1e-10 {
                // W state: E(0) = 0, so E(k)/(-ik) -> i E'(0)
                return Ok(PREF * (self.s0_direct(0.0)?.0 + I * self.e_prime_direct(0.0)?));
            }
            return Err(Error::Singularity(
                "psi_out diverges at k = 0 for alpha = 0 outside W".into(),
            ));
        }
        let (s0, _) = self.s0_direct(k)?;
        Ok(PREF * (s0 + self.e_direct(k)? / denom))
    }

    /// Free transform `psi_hat_0(k) = sqrt(2/pi) S0(k)`.
    pub fn free_value(&self, k: f64) -> Result<Complex64> {
        Ok(PREF * self.s0_direct(k)?.0)
    }

    /// `k psi_out(k)`, regular in every regime including `alpha = 0, k -> 0`.
    pub fn value_times_k(&self, k: f64) -> Result<Complex64> {
        if !(k >= 0.0) {
            return Err(Error::Argument(format!("momentum must be >= 0, got {k}")));
        }
        let (s0, _) = self.s0_direct(k)?;
        let e = self.e_direct(k)?;
        let g = self.scatter_g(k, e);
        Ok(PREF * (k * s0 + g))
    }

    /// `G(k) = k E(k) / (4 pi alpha - i k)`, assembled without cancellation
    /// at the resonance (`alpha = 0`: `G = i E`).
    fn scatter_g(&self, k: f64, e: Complex64) -> Complex64 {
        if self.interaction.alpha == 0.0 {
            I * e
        } else {
            k * e / c64(4.0 * PI * self.interaction.alpha, -k)
        }
    }

    /// `d psi_out / dk`, direct quadrature, `k > 0`.
    pub fn derivative(&self, k: f64) -> Result<Complex64> {
        if !(k > 0.0) && self.interaction.alpha == 0.0 {
            return Err(Error::Singularity(
                "psi_out' needs k > 0 at the resonance".into(),
            ));
        }
        let denom = c64(4.0 * PI * self.interaction.alpha, -k);
        let (_, ds0) = self.s0_direct(k)?;
        let e = self.e_direct(k)?;
        let de = self.e_prime_direct(k)?;
        Ok(PREF * (ds0 + de / denom + I * e / (denom * denom)))
    }

    /// Coefficient `c` in `psi_out(k) ~ c / k` as `k -> 0`; zero away from
    /// the resonance.  `|c| > 0` iff `alpha = 0` and the state is outside W.
    pub fn zero_momentum_coefficient(&self) -> Complex64 {
        if self.interaction.alpha != 0.0 {
            return c64(0.0, 0.0);
        }
        PREF * I * self.series_e(0.0).0
    }

    /// Overlap `<psi_b, psi0>` with the normalized bound state (`alpha < 0`),
    /// zero otherwise.
    pub fn bound_overlap(&self) -> Result<Complex64> {
        if let Some(v) = self.bound_overlap_cache.get() {
            return Ok(*v);
        }
        let v = if self.interaction.regime() == Regime::Negative {
            let spec = self.quad.with_abs_tol(1e-13);
            let pts: Vec<f64> = self.radial_pts().iter().map(|&p| p.max(1e-12)).collect();
            let p = self.interaction;
            let q = integrate_complex(
                |r| p.bound_state(r).unwrap() * self.state.eval(r) * r * r,
                &pts,
                &spec,
            );
            4.0 * PI * q.value
        } else {
            c64(0.0, 0.0)
        };
        let _ = self.bound_overlap_cache.set(v);
        Ok(v)
    }

    // ---- tabulated fast path ----

    fn build_nodes(&self, from: f64, to: f64) -> Vec<f64> {
        let mut nodes = Vec::new();
        let mut k = from;
        while k < to {
            nodes.push(k);
            k += 0.01 * (k / 5.0).max(1.0);
        }
        nodes.push(k);
        nodes
    }

    pub(crate) fn ensure_table(&self, k_req: f64) -> Result<()> {
        let k_req = k_req.min(K_CAP);
        {
            let guard = self.table.read().unwrap();
            if let Some(t) = guard.as_ref() {
                if t.k_max() >= k_req {
                    return Ok(());
                }
            }
        }
        let mut guard = self.table.write().unwrap();
        let start = guard.as_ref().map(|t| t.k_max()).unwrap_or(0.0);
        if start >= k_req {
            return Ok(());
        }
        let mut fspec = self.quad;
        fspec.oscillation_strategy = OscillationStrategy::FilonPhaseExtraction;
        let fast = |amp: fn(f64, Complex64) -> Complex64, k: f64, state: &RadialState| {
            integrate_oscillatory(
                |y| amp(y, state.eval(y)),
                k,
                Domain::SemiInfinite(0.0),
                state.decay,
                &fspec,
            )
            .map(|r| r.value)
        };
        let target = (1.2 * k_req).min(K_CAP);
        let new_nodes = if guard.is_some() {
            // resume from the previous last node so segments stay contiguous
            self.build_nodes(start, target)
        } else {
            self.build_nodes(0.0, target)
        };
        let skip_first = guard.is_some(); // start node already tabulated
        let table = guard.get_or_insert_with(|| ProfileTable {
            k: Vec::new(),
            e: Vec::new(),
            de: Vec::new(),
            dde: Vec::new(),
            em: Vec::new(),
            dem: Vec::new(),
            ddem: Vec::new(),
        });
        for (i, &k) in new_nodes.iter().enumerate() {
            if skip_first && i == 0 {
                continue;
            }
            let e = fast(|y, p| y * p, k, &self.state)?;
            let de = fast(|y, p| I * y * y * p, k, &self.state)?;
            let dde = fast(|y, p| -y * y * y * p, k, &self.state)?;
            table.k.push(k);
            table.e.push(e);
            table.de.push(de);
            table.dde.push(dde);
            if !self.real_profile {
                let em = fast(|y, p| y * p, -k, &self.state)?;
                let dem = -fast(|y, p| I * y * y * p, -k, &self.state)?;
                let ddem = fast(|y, p| -y * y * y * p, -k, &self.state)?;
                table.em.push(em);
                table.dem.push(dem);
                table.ddem.push(ddem);
            }
        }
        Ok(())
    }

    /// Tabulated `(S0, S0', E, E')` at `k >= 0`; the table must already cover
    /// `k` (see [`OutgoingState::ensure_table`]).
    pub(crate) fn fast_profile(&self, k: f64) -> (Complex64, Complex64, Complex64, Complex64) {
        if k <= K_SERIES {
            let (s0, ds0) = self.series_s0(k);
            let (e, de) = self.series_e(k);
            return (s0, ds0, e, de);
        }
        let guard = self.table.read().unwrap();
        let t = guard.as_ref().expect("profile table not built");
        let (e, de, em, dem) = t.eval(k, self.real_profile);
        let tik = c64(0.0, 2.0 * k);
        let s0 = (e - em) / tik;
        let ds0 = (de + dem) / tik - (e - em) / (tik * k);
        (s0, ds0, e, de)
    }
}

/// Evolve the absolutely continuous part of the state by the eigenfunction
/// expansion; returns value and radial derivative at radius `x`.
pub fn spectral_evolve(out: &OutgoingState, x: f64, t: f64) -> Result<WaveSample> {
    let parts = spectral_components(out, x, t)?;
    Ok(parts.a + parts.b)
}

/// Spectral evolution plus the bound-state projection when `alpha < 0`; this
/// is the full wave function.
pub fn spectral_evolve_full(out: &OutgoingState, x: f64, t: f64) -> Result<WaveSample> {
    let mut s = spectral_evolve(out, x, t)?;
    if out.interaction.regime() == Regime::Negative {
        s = s + bound_term(&out.interaction, out.bound_overlap()?, x, t);
    }
    Ok(s)
}

/// `<psi_b, psi0> e^{-i lambda t} psi_b(x)` with `lambda = -(4 pi alpha)^2`.
pub fn bound_term(p: &PointInteraction, overlap: Complex64, x: f64, t: f64) -> WaveSample {
    let lambda = match p.bound_state_energy() {
        Some(l) => l,
        None => return WaveSample::zero(),
    };
    let psi_b = p.bound_state(x).unwrap();
    let phase = c64(0.0, -lambda * t).exp();
    let value = overlap * phase * psi_b;
    WaveSample {
        value,
        // psi_b' = psi_b (4 pi alpha - 1/x)
        derivative: value * (4.0 * PI * p.alpha - 1.0 / x),
    }
}

/// Blocked, phase-resolved integral of `f(k)` over `[0, infinity)`.  The
/// integrand decomposes as `f = gp e^{i(kx - k^2 t)} + gm e^{-i(kx + k^2 t)}`
/// with smooth amplitudes `gp`, `gm`; after each doubling block the remaining
/// tail is estimated by two rounds of integration by parts, and the blocked
/// sum plus tail is accepted once two consecutive estimates agree.
fn oscillating_k_integral<F: Fn(f64) -> Complex64>(
    out: &OutgoingState,
    f: F,
    tails: (
        Option<&dyn Fn(f64) -> Complex64>,
        Option<&dyn Fn(f64) -> Complex64>,
    ),
    x: f64,
    t: f64,
    tol: f64,
) -> Result<(Complex64, bool)> {
    let mut spec = out.quad;
    spec.abs_tol = (tol / 8.0).max(1e-13);
    spec.rel_tol = spec.rel_tol.max(1e-10);
    spec.max_subdivisions = 400_000;

    // int_K^inf g e^{i phi} dk = -e^{i phi(K)} [G1(K) - G1'(K)/(i phi'(K))]
    // + O(next order), with G1 = g / (i phi'), phi = s k x - k^2 t
    let tail_at = |kk: f64| -> Option<(Complex64, f64)> {
        let mut sum = c64(0.0, 0.0);
        let mut err = 0.0f64;
        for (sgn, g) in [(1.0, tails.0), (-1.0, tails.1)] {
            let g = match g {
                Some(g) => g,
                None => continue,
            };
            let dphi = |k: f64| sgn * x - 2.0 * k * t;
            if dphi(kk).abs() < 1.0 {
                return None;
            }
            let g1 = |k: f64| g(k) / c64(0.0, dphi(k));
            let h = 0.005 * (kk / 5.0).max(1.0);
            // backward stencil once the profile table cap is reached
            let d_g1 = if kk + h <= K_CAP {
                (g1(kk + h) - g1(kk - h)) / (2.0 * h)
            } else {
                (g1(kk) - g1(kk - 2.0 * h)) / (2.0 * h)
            };
            let phase = c64(0.0, sgn * kk * x - kk * kk * t).exp();
            let t1 = -phase * g1(kk);
            let t2 = phase * d_g1 / c64(0.0, dphi(kk));
            sum += t1 + t2;
            err += if t1.norm() > 0.0 {
                t2.norm() * (t2.norm() / t1.norm()).min(1.0)
            } else {
                t2.norm()
            };
        }
        Some((sum, err))
    };

    let k1 = (if t > 0.0 { x / t } else { 0.0 } + 5.0).max(10.0);
    let mut lo = 0.0f64;
    let mut hi = k1;
    let mut total = c64(0.0, 0.0);
    let mut converged = true;
    let mut prev: Option<Complex64> = None;
    loop {
        out.ensure_table(hi + 0.005 * (hi / 5.0).max(1.0) + 1.0)?;
        // breakpoints advancing the phase k^2 t + k x by ~pi per panel
        let mut pts = vec![lo];
        let mut k = lo;
        while k < hi {
            k += PI / (2.0 * t * k + x + 1.0);
            pts.push(k.min(hi));
        }
        let r = integrate_complex(&f, &pts, &spec);
        total += r.value;
        converged &= r.converged;
        match tail_at(hi) {
            Some((tail, terr)) if terr < tol / 2.0 => {
                let candidate = total + tail;
                if let Some(p) = prev {
                    if (candidate - p).norm() < tol / 2.0 {
                        return Ok((candidate, converged));
                    }
                }
                prev = Some(candidate);
            }
            _ => prev = None,
        }
        if hi >= K_CAP {
            let tail = tail_at(hi).map(|(v, _)| v).unwrap_or_else(|| c64(0.0, 0.0));
            return Ok((total + tail, false));
        }
        lo = hi;
        hi = (2.0 * hi).min(K_CAP);
    }
}

/// The two spectral pieces with radial derivatives:
///
/// ```text
///   a(x,t) = (2/pi) int e^{-i k^2 t} [S0 k^2 + k G] sinc(k x) dk
///   b(x,t) = (2/pi) (1/x) int e^{-i k^2 t} H(k) e^{-i k x} dk
/// ```
///
/// with `G = k E / (4 pi alpha - i k)` and
/// `H = [S0 k^2 + k G] / (4 pi alpha + i k)` (resonant limit `E - i k S0`).
pub fn spectral_components(out: &OutgoingState, x: f64, t: f64) -> Result<SpectralParts> {
    if !(x > 0.0) {
        return Err(Error::Argument(format!("radius must be > 0, got {x}")));
    }
    if !(t >= 0.0) {
        return Err(Error::Argument(format!("time must be >= 0, got {t}")));
    }
    let tol = out.quad.abs_tol.max(1e-9);
    let alpha = out.interaction.alpha;
    let pref2 = PREF * PREF; // 2/pi

    let amp = |k: f64| -> Complex64 {
        // S0 k^2 + k G, common to both pieces
        let (s0, _, e, _) = out.fast_profile(k);
        s0 * k * k + k * out.scatter_g(k, e)
    };
    let h_amp = |k: f64| -> Complex64 {
        if alpha == 0.0 {
            let (s0, _, e, _) = out.fast_profile(k);
            e - I * k * s0
        } else {
            amp(k) / c64(4.0 * PI * alpha, k)
        }
    };
    let phase = |k: f64| c64(0.0, -k * k * t).exp();

    // tail amplitudes: sinc(kx) = (e^{ikx} - e^{-ikx}) / (2ikx) and
    // k dsinc(kx) = (1/2x +- i/2kx^2) e^{+-ikx}
    let a_gp = |k: f64| amp(k) / c64(0.0, 2.0 * k * x);
    let a_gm = |k: f64| -amp(k) / c64(0.0, 2.0 * k * x);
    let ad_gp = |k: f64| amp(k) * c64(0.5 / x, 0.5 / (k * x * x));
    let ad_gm = |k: f64| amp(k) * c64(0.5 / x, -0.5 / (k * x * x));
    let b_gm = |k: f64| h_amp(k);
    let bd_gm = |k: f64| -I * k * h_amp(k);

    let (a_val, c1) = oscillating_k_integral(
        out,
        |k| amp(k) * sinc(k * x) * phase(k),
        (Some(&a_gp), Some(&a_gm)),
        x,
        t,
        tol,
    )?;
    let (a_der, c2) = oscillating_k_integral(
        out,
        |k| amp(k) * k * dsinc(k * x) * phase(k),
        (Some(&ad_gp), Some(&ad_gm)),
        x,
        t,
        tol,
    )?;
    let (b_val, c3) = oscillating_k_integral(
        out,
        |k| h_amp(k) * c64(0.0, -k * x).exp() * phase(k),
        (None, Some(&b_gm)),
        x,
        t,
        tol,
    )?;
    let (b_der, c4) = oscillating_k_integral(
        out,
        |k| c64(0.0, -k) * h_amp(k) * c64(0.0, -k * x).exp() * phase(k),
        (None, Some(&bd_gm)),
        x,
        t,
        tol,
    )?;

    let b_value = pref2 / x * b_val;
    Ok(SpectralParts {
        a: WaveSample {
            value: pref2 * a_val,
            derivative: pref2 * a_der,
        },
        b: WaveSample {
            value: b_value,
            derivative: -b_value / x + pref2 / x * b_der,
        },
        converged: c1 && c2 && c3 && c4,
    })
}

/// `||psi_out||^2 = 4 pi int_0^inf |k psi_out(k)|^2 dk`; equals `||psi0||^2`
/// minus the bound-state overlap for `alpha < 0`.
pub fn momentum_norm_sq(out: &OutgoingState) -> Result<f64> {
    out.ensure_table(600.0)?;
    let m = |k: f64| -> f64 {
        let (s0, _, e, _) = out.fast_profile(k);
        (PREF * (k * s0 + out.scatter_g(k, e))).norm_sqr()
    };
    let spec = out.quad.with_abs_tol(1e-11);
    let pts = [0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0, 100.0, 300.0, 600.0];
    let q = crate::numerics::integrate_real(m, &pts, &spec);
    Ok(4.0 * PI * q.value.re)
}

/// Closed form of `I(x,t) = int_0^inf k e^{-xi k^2 - i x k} dk`, `xi = 1 + it`:
///
/// ```text
///   I = 1/(2 xi) - i x sqrt(pi) / (4 xi^{3/2}) w(-x / (2 sqrt(xi)))
/// ```
pub fn resonant_tail_integral(x: f64, t: f64) -> Result<Complex64> {
    let xi = c64(1.0, t);
    let sq = xi.sqrt();
    let u = -x / (2.0 * sq);
    let w = faddeeva(u)?;
    Ok(1.0 / (2.0 * xi) - I * x * PI.sqrt() / (4.0 * xi * sq) * w)
}

/// Radial derivative of [`resonant_tail_integral`] in `x`.
pub fn resonant_tail_integral_dx(x: f64, t: f64) -> Result<Complex64> {
    let xi = c64(1.0, t);
    let sq = xi.sqrt();
    let u = -x / (2.0 * sq);
    let w = faddeeva(u)?;
    // w'(u) = -2 u w(u) + 2 i / sqrt(pi); du/dx = -1/(2 sqrt(xi))
    let wp = -2.0 * u * w + 2.0 * I / PI.sqrt();
    Ok(-I * PI.sqrt() / (4.0 * xi * sq) * (w - wp * x / (2.0 * sq)))
}

/// Decomposition of the resonant spherical-wave piece
/// `b = (c/x) int_0^inf e^{-i k^2 t - i x k} Psi(k) k dk`, `c = -i sqrt(2/pi)`,
/// into a regularized part `b1` (amplitude `Psi(k) - Psi(0) e^{-k^2}`) and a
/// universal part `b2 = (c/x) Psi(0) I(x,t)` with `I` in closed form.
#[derive(Debug, Clone, Copy)]
pub struct ResonantBSplit {
    pub b_total: Complex64,
    pub b1: Complex64,
    pub b2_quadrature: Complex64,
    pub b2_closed: Complex64,
    pub b2_derivative: Complex64,
    /// `|b1 + b2_closed - b_total|`.
    pub consistency: f64,
}

pub fn resonant_b_split<F: Fn(f64) -> Complex64>(
    profile: F,
    x: f64,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<ResonantBSplit> {
    spec.validate()?;
    if !(x > 0.0) || !(t >= 0.0) {
        return Err(Error::Argument(format!(
            "resonant_b_split needs x > 0, t >= 0; got x = {x}, t = {t}"
        )));
    }
    let c = -I * PREF;
    let psi0 = profile(0.0);

    // profiles are Gaussian-class; truncate where e^{-k^2} is negligible
    // relative to the tolerance and the sampled prefactor
    let mut pre: f64 = 1e-300;
    for i in 0..=32 {
        let k = 8.0 * i as f64 / 32.0;
        pre = pre.max(profile(k).norm() / (-k * k).exp());
    }
    let k_end = (pre / spec.abs_tol.max(1e-14)).ln().max(4.0).sqrt() + 2.0;

    let quad_of = |g: &dyn Fn(f64) -> Complex64| -> Complex64 {
        let mut pts = vec![0.0];
        let mut k = 0.0f64;
        while k < k_end {
            k += PI / (2.0 * t * k + x + 1.0);
            pts.push(k.min(k_end));
        }
        let mut s = *spec;
        s.max_subdivisions = 200_000;
        integrate_complex(
            |k| g(k) * c64(0.0, -(k * k * t + x * k)).exp(),
            &pts,
            &s,
        )
        .value
    };

    let b_total = c / x * quad_of(&|k| profile(k) * k);
    let b1 = c / x * quad_of(&|k| (profile(k) - psi0 * (-k * k).exp()) * k);
    let b2_quadrature = c / x * psi0 * quad_of(&|k| c64((-k * k).exp() * k, 0.0));
    let i_closed = resonant_tail_integral(x, t)?;
    let b2_closed = c / x * psi0 * i_closed;
    let b2_derivative = -b2_closed / x + c / x * psi0 * resonant_tail_integral_dx(x, t)?;
    Ok(ResonantBSplit {
        b_total,
        b1,
        b2_quadrature,
        b2_closed,
        b2_derivative,
        consistency: (b1 + b2_closed - b_total).norm(),
    })
}
