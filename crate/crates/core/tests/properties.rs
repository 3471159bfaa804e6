//! Property-based invariants over randomized inputs.

use pointflux::model::{make_preset_state, w_membership, Preset, RadialState};
use pointflux::numerics::{
    erfc_complex, faddeeva, integrate_oscillatory, DecayClass, Domain, QuadratureSpec,
};
use pointflux::Complex64;
use proptest::prelude::*;

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn faddeeva_conjugate_symmetry(re in -10.0f64..10.0, im in -3.0f64..10.0) {
        // w(-conj(z)) = conj(w(z)); lower half-plane restricted to modest
        // |Im z| where e^{-z^2} growth stays in range
        let z = Complex64::new(re, im);
        let a = faddeeva(-z.conj()).unwrap();
        let b = faddeeva(z).unwrap().conj();
        let scale = a.norm().max(b.norm()).max(1e-300);
        prop_assert!((a - b).norm() / scale <= 1e-13, "z = {z}, diff {:e}", (a - b).norm() / scale);
    }

    #[test]
    fn erfc_reflection(re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let z = Complex64::new(re, im);
        let s = erfc_complex(z).unwrap() + erfc_complex(-z).unwrap();
        let scale = s.norm().max(1.0);
        prop_assert!((s - Complex64::new(2.0, 0.0)).norm() / scale <= 1e-12);
    }

    #[test]
    fn oscillatory_integral_is_linear(s in -20.0f64..20.0, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let f = move |y: f64| Complex64::new(a * (-y).exp(), 0.0);
        let g = move |y: f64| Complex64::new(b * y * (-y).exp(), 0.0);
        let fg = move |y: f64| f(y) + g(y);
        let dec = DecayClass::Exponential { rate: 1.0 };
        let dom = Domain::SemiInfinite(0.0);
        let qf = integrate_oscillatory(f, s, dom, dec, &spec()).unwrap().value;
        let qg = integrate_oscillatory(g, s, dom, dec, &spec()).unwrap().value;
        let qfg = integrate_oscillatory(fg, s, dom, dec, &spec()).unwrap().value;
        prop_assert!((qf + qg - qfg).norm() <= 1e-9, "diff {:e}", (qf + qg - qfg).norm());
    }

    #[test]
    fn w_membership_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let exp = make_preset_state(Preset::ExponentialDecay).unwrap();
        let gau = make_preset_state(Preset::Gaussian { sigma: 1.0 }).unwrap();
        let combo = RadialState::from_profile(
            {
                let (e, g) = (exp.clone(), gau.clone());
                move |r: f64| a * e.eval(r) + b * g.eval(r)
            },
            DecayClass::Exponential { rate: 1.0 },
            "linear combination",
        );
        let q = spec();
        let (ve, _) = w_membership(&exp, &q);
        let (vg, _) = w_membership(&gau, &q);
        let (vc, _) = w_membership(&combo, &q);
        let want = a * ve.value + b * vg.value;
        prop_assert!((vc.value - want).norm() <= 1e-8, "diff {:e}", (vc.value - want).norm());
    }

    #[test]
    fn exponential_amplitude_decays_like_inverse_phase(s in 20.0f64..120.0) {
        // |int_0^inf e^{-y} e^{isy} dy| = 1/sqrt(1+s^2)
        let f = |y: f64| Complex64::new((-y).exp(), 0.0);
        let q = integrate_oscillatory(
            f,
            s,
            Domain::SemiInfinite(0.0),
            DecayClass::Exponential { rate: 1.0 },
            &spec(),
        )
        .unwrap();
        let want = 1.0 / (1.0 + s * s).sqrt();
        prop_assert!((q.value.norm() - want).abs() / want <= 1e-6);
    }
}
