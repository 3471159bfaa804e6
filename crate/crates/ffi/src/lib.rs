//! C ABI over the pointflux laboratory.
//!
//! Conventions: every function returns a [`PfStatus`] code and writes results
//! through out-pointers; handles are opaque and must be released with
//! `pf_lab_free`; `pf_last_error` returns a thread-local message for the most
//! recent failure on the calling thread.

use pointflux::config::Config;
use pointflux::flux::{fas_lhs, fas_rhs, main_term_identity};
use pointflux::model::{norm, w_membership, ConeSurface};
use pointflux::propagator;
use pointflux::spectral::OutgoingState;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status codes returned by every ABI function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PfStatus {
    PfOk = 0,
    PfErrNullPointer = 1,
    PfErrUtf8 = 2,
    PfErrArgument = 3,
    PfErrRange = 4,
    PfErrSingularity = 5,
    PfErrConfig = 6,
    PfErrIo = 7,
    PfErrNotConverged = 8,
    PfErrPanic = 9,
}

/// Opaque laboratory handle: an interaction, a prepared state, and the
/// quadrature policy, with the outgoing-profile tables cached inside.
pub struct PfLab {
    out: OutgoingState,
    cone: ConeSurface,
}

/// One evolved sample: value and radial derivative at `(r, t)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PfSample {
    pub value_re: f64,
    pub value_im: f64,
    pub derivative_re: f64,
    pub derivative_im: f64,
}

/// Flux-across-surfaces balance at one radius.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PfFasReport {
    pub lhs_truncated: f64,
    pub tail_estimate: f64,
    pub rhs: f64,
    pub relative_error: f64,
    pub t_max: f64,
    /// 1 when the tail fit flags divergence, else 0.
    pub tail_divergent: i32,
    /// 1 when every quadrature converged, else 0.
    pub converged: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &pointflux::Error) -> PfStatus {
    match err {
        pointflux::Error::Argument(_) => PfStatus::PfErrArgument,
        pointflux::Error::Range(_) => PfStatus::PfErrRange,
        pointflux::Error::Singularity(_) => PfStatus::PfErrSingularity,
        pointflux::Error::Config(_) => PfStatus::PfErrConfig,
        pointflux::Error::Io(_) => PfStatus::PfErrIo,
    }
}

fn fail(err: pointflux::Error) -> PfStatus {
    let code = status_of(&err);
    set_error(&err.to_string());
    code
}

fn guarded(f: impl FnOnce() -> PfStatus) -> PfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            PfStatus::PfErrPanic
        }
    }
}

/// Message for the most recent failure on this thread; valid until the next
/// failing call on the same thread.  Never null.
#[no_mangle]
pub extern "C" fn pf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Create a laboratory.
///
/// `preset` is one of `"gaussian"`, `"exponential"`, `"w_projected"`,
/// `"bound_orthogonal"`; `sigma` is used by the gaussian preset only;
/// `abs_tol <= 0` selects the default tolerance.  On success writes the new
/// handle to `out_lab`.
#[no_mangle]
pub unsafe extern "C" fn pf_lab_new(
    alpha: f64,
    preset: *const c_char,
    sigma: f64,
    abs_tol: f64,
    out_lab: *mut *mut PfLab,
) -> PfStatus {
    guarded(|| {
        if preset.is_null() || out_lab.is_null() {
            set_error("null pointer argument");
            return PfStatus::PfErrNullPointer;
        }
        let preset = match unsafe { CStr::from_ptr(preset) }.to_str() {
            Ok(s) => s.to_string(),
            Err(_) => {
                set_error("preset is not valid UTF-8");
                return PfStatus::PfErrUtf8;
            }
        };
        let mut cfg = Config::default();
        cfg.alpha = alpha;
        cfg.preset = preset;
        cfg.sigma = sigma;
        if abs_tol > 0.0 {
            cfg.abs_tol = abs_tol;
            cfg.rel_tol = abs_tol;
        }
        if let Err(e) = cfg.validate() {
            return fail(e);
        }
        let built = cfg.interaction().and_then(|interaction| {
            let state = cfg.state()?;
            let cone = cfg.cone()?;
            let out = OutgoingState::new(interaction, state, cfg.quad_spec())?;
            Ok(PfLab { out, cone })
        });
        match built {
            Ok(lab) => {
                unsafe { *out_lab = Box::into_raw(Box::new(lab)) };
                PfStatus::PfOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Release a handle; accepts null.
#[no_mangle]
pub unsafe extern "C" fn pf_lab_free(lab: *mut PfLab) {
    if !lab.is_null() {
        drop(unsafe { Box::from_raw(lab) });
    }
}

unsafe fn borrow<'a>(lab: *const PfLab) -> Option<&'a PfLab> {
    unsafe { lab.as_ref() }
}

/// L2 norm of the prepared state (1 for normalized presets, less than 1 for
/// the bound-orthogonal preset's free part after projection).
#[no_mangle]
pub unsafe extern "C" fn pf_state_norm(lab: *const PfLab, out_norm: *mut f64) -> PfStatus {
    guarded(|| {
        let (Some(lab), false) = (unsafe { borrow(lab) }, out_norm.is_null()) else {
            set_error("null pointer argument");
            return PfStatus::PfErrNullPointer;
        };
        unsafe { *out_norm = norm(&lab.out.state) };
        PfStatus::PfOk
    })
}

/// Whether the state satisfies the zero-resonance pseudo-orthogonality
/// condition (vanishing `int psi(x)/|x| dx`); writes 1 or 0.
#[no_mangle]
pub unsafe extern "C" fn pf_in_w(lab: *const PfLab, out_in_w: *mut i32) -> PfStatus {
    guarded(|| {
        let (Some(lab), false) = (unsafe { borrow(lab) }, out_in_w.is_null()) else {
            set_error("null pointer argument");
            return PfStatus::PfErrNullPointer;
        };
        let (_, in_w) = w_membership(&lab.out.state, &lab.out.quad);
        unsafe { *out_in_w = in_w as i32 };
        PfStatus::PfOk
    })
}

/// Evolve the state to `(r, t)` via the propagator decomposition.
#[no_mangle]
pub unsafe extern "C" fn pf_evolve(
    lab: *const PfLab,
    r: f64,
    t: f64,
    out_sample: *mut PfSample,
) -> PfStatus {
    guarded(|| {
        let (Some(lab), false) = (unsafe { borrow(lab) }, out_sample.is_null()) else {
            set_error("null pointer argument");
            return PfStatus::PfErrNullPointer;
        };
        match propagator::decomposition(&lab.out, r, t) {
            Ok(d) => {
                let v = d.value();
                let g = d.radial_derivative();
                unsafe {
                    *out_sample = PfSample {
                        value_re: v.re,
                        value_im: v.im,
                        derivative_re: g.re,
                        derivative_im: g.im,
                    };
                }
                if d.converged {
                    PfStatus::PfOk
                } else {
                    set_error("quadrature did not converge; best estimate written");
                    PfStatus::PfErrNotConverged
                }
            }
            Err(e) => fail(e),
        }
    })
}

/// Radial profile of the asymptotic outgoing state at momentum `k > 0`.
#[no_mangle]
pub unsafe extern "C" fn pf_outgoing_value(
    lab: *const PfLab,
    k: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> PfStatus {
    guarded(|| {
        let (Some(lab), false) = (unsafe { borrow(lab) }, out_re.is_null() || out_im.is_null())
        else {
            set_error("null pointer argument");
            return PfStatus::PfErrNullPointer;
        };
        match lab.out.value(k) {
            Ok(v) => {
                unsafe {
                    *out_re = v.re;
                    *out_im = v.im;
                }
                PfStatus::PfOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Flux-across-surfaces balance at one radius over `[t_start, inf)`; the
/// time integral is truncated adaptively and the fitted tail is reported.
#[no_mangle]
pub unsafe extern "C" fn pf_fas_report(
    lab: *const PfLab,
    radius: f64,
    t_start: f64,
    out_report: *mut PfFasReport,
) -> PfStatus {
    guarded(|| {
        let (Some(lab), false) = (unsafe { borrow(lab) }, out_report.is_null()) else {
            set_error("null pointer argument");
            return PfStatus::PfErrNullPointer;
        };
        match fas_lhs(&lab.out, radius, t_start, None, &lab.cone) {
            Ok(rep) => {
                unsafe {
                    *out_report = PfFasReport {
                        lhs_truncated: rep.lhs_truncated,
                        tail_estimate: rep.tail_estimate,
                        rhs: rep.rhs,
                        relative_error: rep.relative_error,
                        t_max: rep.t_max,
                        tail_divergent: rep.tail_divergent as i32,
                        converged: rep.converged as i32,
                    };
                }
                PfStatus::PfOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Momentum-space side of the flux identity over the full sphere.
#[no_mangle]
pub unsafe extern "C" fn pf_fas_rhs(lab: *const PfLab, out_rhs: *mut f64) -> PfStatus {
    guarded(|| {
        let (Some(lab), false) = (unsafe { borrow(lab) }, out_rhs.is_null()) else {
            set_error("null pointer argument");
            return PfStatus::PfErrNullPointer;
        };
        match fas_rhs(&lab.out, &lab.cone) {
            Ok(v) => {
                unsafe { *out_rhs = v };
                PfStatus::PfOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Both sides of the exact main-term identity at `(radius, t_start)`.
#[no_mangle]
pub unsafe extern "C" fn pf_main_term_identity(
    lab: *const PfLab,
    radius: f64,
    t_start: f64,
    out_lhs: *mut f64,
    out_rhs: *mut f64,
) -> PfStatus {
    guarded(|| {
        let (Some(lab), false) = (unsafe { borrow(lab) }, out_lhs.is_null() || out_rhs.is_null())
        else {
            set_error("null pointer argument");
            return PfStatus::PfErrNullPointer;
        };
        match main_term_identity(&lab.out, radius, t_start, &lab.cone) {
            Ok((lhs, rhs)) => {
                unsafe {
                    *out_lhs = lhs;
                    *out_rhs = rhs;
                }
                PfStatus::PfOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn pf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;
    use std::ptr;

    fn new_lab(alpha: f64, preset: &str) -> *mut PfLab {
        let preset = CString::new(preset).unwrap();
        let mut lab: *mut PfLab = ptr::null_mut();
        let st = unsafe { pf_lab_new(alpha, preset.as_ptr(), 1.0, 1e-10, &mut lab) };
        assert_eq!(st, PfStatus::PfOk, "{:?}", last_error());
        assert!(!lab.is_null());
        lab
    }

    fn last_error() -> String {
        unsafe { CStr::from_ptr(pf_last_error()) }
            .to_string_lossy()
            .into_owned()
    }

    #[test]
    fn evolve_matches_core_library() {
        let lab = new_lab(1.0, "gaussian");
        let mut s = PfSample::default();
        assert_eq!(unsafe { pf_evolve(lab, 3.0, 1.0, &mut s) }, PfStatus::PfOk);
        let cfg = {
            let mut c = Config::default();
            c.alpha = 1.0;
            c
        };
        let out = OutgoingState::new(
            cfg.interaction().unwrap(),
            cfg.state().unwrap(),
            cfg.quad_spec(),
        )
        .unwrap();
        let d = propagator::decomposition(&out, 3.0, 1.0).unwrap();
        assert!((d.value().re - s.value_re).abs() < 1e-12);
        assert!((d.value().im - s.value_im).abs() < 1e-12);
        unsafe { pf_lab_free(lab) };
    }

    #[test]
    fn bad_arguments_map_to_codes_and_messages() {
        let mut lab: *mut PfLab = ptr::null_mut();
        let st = unsafe { pf_lab_new(0.0, ptr::null(), 1.0, 1e-10, &mut lab) };
        assert_eq!(st, PfStatus::PfErrNullPointer);

        let preset = CString::new("no_such_preset").unwrap();
        let st = unsafe { pf_lab_new(0.0, preset.as_ptr(), 1.0, 1e-10, &mut lab) };
        assert_eq!(st, PfStatus::PfErrConfig);
        assert!(last_error().contains("no_such_preset"), "{}", last_error());

        let lab = new_lab(0.0, "gaussian");
        let mut s = PfSample::default();
        let st = unsafe { pf_evolve(lab, -1.0, 1.0, &mut s) };
        assert_eq!(st, PfStatus::PfErrArgument);
        unsafe { pf_lab_free(lab) };
        unsafe { pf_lab_free(ptr::null_mut()) };
    }

    #[test]
    fn w_membership_over_the_abi() {
        let lab = new_lab(0.0, "w_projected");
        let mut in_w = -1;
        assert_eq!(unsafe { pf_in_w(lab, &mut in_w) }, PfStatus::PfOk);
        assert_eq!(in_w, 1);
        unsafe { pf_lab_free(lab) };

        let lab = new_lab(0.0, "exponential");
        assert_eq!(unsafe { pf_in_w(lab, &mut in_w) }, PfStatus::PfOk);
        assert_eq!(in_w, 0);
        unsafe { pf_lab_free(lab) };
    }

    #[test]
    fn identity_and_rhs_are_consistent_over_the_abi() {
        let lab = new_lab(1.0, "gaussian");
        let (mut lhs, mut rhs) = (0.0, 0.0);
        let st = unsafe { pf_main_term_identity(lab, 10.0, 1.0, &mut lhs, &mut rhs) };
        assert_eq!(st, PfStatus::PfOk);
        assert!((lhs - rhs).abs() <= 1e-5 * rhs.abs(), "{lhs} vs {rhs}");

        let mut total = 0.0;
        assert_eq!(unsafe { pf_fas_rhs(lab, &mut total) }, PfStatus::PfOk);
        assert!(rhs <= total + 1e-9, "partial {rhs} beyond total {total}");

        let mut n = 0.0;
        assert_eq!(unsafe { pf_state_norm(lab, &mut n) }, PfStatus::PfOk);
        assert!((n - 1.0).abs() < 1e-8);
        unsafe { pf_lab_free(lab) };
    }

    #[test]
    fn header_is_generated_and_exposes_the_handle() {
        let header = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/include/pointflux.h"
        ))
        .expect("cbindgen header exists");
        for needle in [
            "typedef struct PfLab PfLab",
            "pf_lab_new",
            "pf_evolve",
            "pf_fas_report",
            "pf_last_error",
            "PF_STATUS_PF_OK",
        ] {
            assert!(header.contains(needle), "header misses '{needle}'");
        }
    }
}
