//! C ABI for the anharmonic oscillator toolkit.
//!
//! Conventions:
//! - every fallible function returns an [`AnhStatus`] and writes its
//!   result through out-pointers;
//! - handles are opaque and must be released with the matching `_free`;
//! - strings returned by the library are NUL-terminated, UTF-8, and
//!   must be released with [`anh_string_free`];
//! - on failure, [`anh_last_error_message`] returns a thread-local
//!   description of the most recent error.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use anharmonic::approximant::{optimize_params, OptimizeOpts};
use anharmonic::error::Error;
use anharmonic::exact::rat_to_string;
use anharmonic::flucton;
use anharmonic::generalized_bloch::{det_log, gb_series, GbSeries};
use anharmonic::reference;
use anharmonic::riccati_bloch::{eps_partial_sum, rb_ground_series, RbSeries};
use anharmonic::Potential;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AnhStatus {
    Ok = 0,
    /// Invalid configuration or arguments.
    Config = 1,
    /// A numerical routine failed to converge or hit a domain error.
    Numeric = 2,
    /// A required pointer argument was NULL.
    NullArgument = 3,
    /// A string argument was not valid UTF-8.
    Utf8 = 4,
    /// Internal panic; state is still consistent but the call failed.
    Panic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> AnhStatus {
    match err.exit_code() {
        2 => AnhStatus::Config,
        _ => AnhStatus::Numeric,
    }
}

fn run<T, F: FnOnce() -> Result<T, Error>>(f: F, sink: impl FnOnce(T)) -> AnhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => {
            sink(v);
            AnhStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            AnhStatus::Panic
        }
    }
}

/// Message describing the most recent error on this thread. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn anh_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Release a string allocated by this library.
///
/// # Safety
/// `s` must have been returned by a function of this library and not
/// freed before.
#[no_mangle]
pub unsafe extern "C" fn anh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---------------------------------------------------------------------------
// Potential handle.
// ---------------------------------------------------------------------------

/// Opaque potential handle.
pub struct AnhPotential(Potential);

/// Parse a potential from its JSON description.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn anh_potential_from_json(
    json: *const c_char,
    out: *mut *mut AnhPotential,
) -> AnhStatus {
    if json.is_null() || out.is_null() {
        set_error("NULL argument");
        return AnhStatus::NullArgument;
    }
    let text = match CStr::from_ptr(json).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("potential JSON is not valid UTF-8");
            return AnhStatus::Utf8;
        }
    };
    run(
        || Potential::from_json(text),
        |p| *out = Box::into_raw(Box::new(AnhPotential(p))),
    )
}

/// Quartic oscillator profile u^2 + u^4 with the given coupling and
/// hbar.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn anh_potential_quartic(
    g: f64,
    hbar: f64,
    out: *mut *mut AnhPotential,
) -> AnhStatus {
    if out.is_null() {
        set_error("NULL argument");
        return AnhStatus::NullArgument;
    }
    run(
        || Potential::quartic_aho(g, hbar),
        |p| *out = Box::into_raw(Box::new(AnhPotential(p))),
    )
}

/// # Safety
/// `pot` must come from a constructor of this library and not be freed
/// twice.
#[no_mangle]
pub unsafe extern "C" fn anh_potential_free(pot: *mut AnhPotential) {
    if !pot.is_null() {
        drop(Box::from_raw(pot));
    }
}

/// Serialize the potential back to JSON (exact rational coefficients
/// when `exact` is nonzero). The string must be freed with
/// [`anh_string_free`].
///
/// # Safety
/// `pot` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn anh_potential_to_json(
    pot: *const AnhPotential,
    exact: bool,
    out: *mut *mut c_char,
) -> AnhStatus {
    if pot.is_null() || out.is_null() {
        set_error("NULL argument");
        return AnhStatus::NullArgument;
    }
    let text = (*pot).0.to_json(exact).to_string();
    match CString::new(text) {
        Ok(c) => {
            *out = c.into_raw();
            AnhStatus::Ok
        }
        Err(_) => {
            set_error("serialization produced an interior NUL");
            AnhStatus::Numeric
        }
    }
}

/// Effective coupling hbar^(1/2) g.
///
/// # Safety
/// `pot` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn anh_potential_lambda(pot: *const AnhPotential) -> f64 {
    if pot.is_null() {
        return f64::NAN;
    }
    (*pot).0.lambda()
}

/// Profile value Vhat(u).
///
/// # Safety
/// `pot` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn anh_potential_vhat(pot: *const AnhPotential, u: f64) -> f64 {
    if pot.is_null() {
        return f64::NAN;
    }
    (*pot).0.vhat(u)
}

// ---------------------------------------------------------------------------
// Quantum-frame perturbation series.
// ---------------------------------------------------------------------------

/// Opaque handle over the exact-rational ground-state series.
pub struct AnhRbSeries(RbSeries);

/// Compute the ground-state perturbation series to the given order.
///
/// # Safety
/// `pot` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn anh_rb_series_compute(
    pot: *const AnhPotential,
    order: usize,
    out: *mut *mut AnhRbSeries,
) -> AnhStatus {
    if pot.is_null() || out.is_null() {
        set_error("NULL argument");
        return AnhStatus::NullArgument;
    }
    let p = &(*pot).0;
    run(
        || rb_ground_series(p, order),
        |s| *out = Box::into_raw(Box::new(AnhRbSeries(s))),
    )
}

/// # Safety
/// `series` must come from [`anh_rb_series_compute`] and not be freed
/// twice.
#[no_mangle]
pub unsafe extern "C" fn anh_rb_series_free(series: *mut AnhRbSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// # Safety
/// `series` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn anh_rb_series_order(series: *const AnhRbSeries) -> usize {
    if series.is_null() {
        return 0;
    }
    (*series).0.order()
}

/// Energy coefficient as a double (NaN when out of range).
///
/// # Safety
/// `series` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn anh_rb_series_energy_coeff(
    series: *const AnhRbSeries,
    n: usize,
) -> f64 {
    if series.is_null() || n > (*series).0.order() {
        return f64::NAN;
    }
    (*series).0.energy_coeff_f64(n)
}

/// Energy coefficient as an exact "num/den" string; free with
/// [`anh_string_free`].
///
/// # Safety
/// `series` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn anh_rb_series_energy_coeff_rational(
    series: *const AnhRbSeries,
    n: usize,
    out: *mut *mut c_char,
) -> AnhStatus {
    if series.is_null() || out.is_null() {
        set_error("NULL argument");
        return AnhStatus::NullArgument;
    }
    if n > (*series).0.order() {
        set_error("coefficient index out of range");
        return AnhStatus::Config;
    }
    let text = rat_to_string((*series).0.energy_coeff(n));
    *out = CString::new(text).unwrap().into_raw();
    AnhStatus::Ok
}

/// Partial sum of the energy series and its optimal-truncation index.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn anh_rb_partial_sum(
    series: *const AnhRbSeries,
    lambda: f64,
    order: usize,
    value: *mut f64,
    optimal_index: *mut usize,
) -> AnhStatus {
    if series.is_null() || value.is_null() || optimal_index.is_null() {
        set_error("NULL argument");
        return AnhStatus::NullArgument;
    }
    if order > (*series).0.order() {
        set_error("partial-sum order exceeds the series order");
        return AnhStatus::Config;
    }
    let s = eps_partial_sum(&(*series).0, lambda, order);
    *value = s.value;
    *optimal_index = s.optimal_index;
    AnhStatus::Ok
}

// ---------------------------------------------------------------------------
// Classical-frame series and determinant.
// ---------------------------------------------------------------------------

/// Opaque handle over the semiclassical series evaluators.
pub struct AnhGbSeries(GbSeries);

/// Build the semiclassical series, consuming energy coefficients from
/// the quantum-frame series.
///
/// # Safety
/// Handles must be valid and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn anh_gb_series_compute(
    pot: *const AnhPotential,
    series: *const AnhRbSeries,
    order: usize,
    out: *mut *mut AnhGbSeries,
) -> AnhStatus {
    if pot.is_null() || series.is_null() || out.is_null() {
        set_error("NULL argument");
        return AnhStatus::NullArgument;
    }
    let p = &(*pot).0;
    let s = &(*series).0;
    run(
        || gb_series(p, s.energy_coeffs(), order),
        |g| *out = Box::into_raw(Box::new(AnhGbSeries(g))),
    )
}

/// # Safety
/// `series` must come from [`anh_gb_series_compute`] and not be freed
/// twice.
#[no_mangle]
pub unsafe extern "C" fn anh_gb_series_free(series: *mut AnhGbSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Evaluate term n of the semiclassical series at u.
///
/// # Safety
/// `series` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn anh_gb_term(
    series: *const AnhGbSeries,
    n: usize,
    u: f64,
    out: *mut f64,
) -> AnhStatus {
    if series.is_null() || out.is_null() {
        set_error("NULL argument");
        return AnhStatus::NullArgument;
    }
    if n > (*series).0.order() {
        set_error("term index exceeds the series order");
        return AnhStatus::Config;
    }
    let s = &(*series).0;
    run(|| s.term_at(n, u), |v| *out = v)
}

/// Integral of the second-order term from the origin (the determinant
/// logarithm) on the pole-cancelling branch.
///
/// # Safety
/// `pot` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn anh_det_log(
    pot: *const AnhPotential,
    eps0: f64,
    u: f64,
    out: *mut f64,
) -> AnhStatus {
    if pot.is_null() || out.is_null() {
        set_error("NULL argument");
        return AnhStatus::NullArgument;
    }
    let p = &(*pot).0;
    run(|| det_log(p, eps0, u, None), |v| *out = v)
}

// ---------------------------------------------------------------------------
// Classical paths.
// ---------------------------------------------------------------------------

/// Relaxation time from u0 down to u.
///
/// # Safety
/// `pot` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn anh_flucton_time(
    pot: *const AnhPotential,
    u0: f64,
    u: f64,
    out: *mut f64,
) -> AnhStatus {
    if pot.is_null() || out.is_null() {
        set_error("NULL argument");
        return AnhStatus::NullArgument;
    }
    let p = &(*pot).0;
    run(|| flucton::flucton_time(p, u0, u), |v| *out = v)
}

/// One-arm reduced action and the density-matrix exponent.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn anh_flucton_action(
    pot: *const AnhPotential,
    u0: f64,
    reduced: *mut f64,
    exponent: *mut f64,
) -> AnhStatus {
    if pot.is_null() || reduced.is_null() || exponent.is_null() {
        set_error("NULL argument");
        return AnhStatus::NullArgument;
    }
    let p = &(*pot).0;
    run(
        || flucton::flucton_action(p, u0),
        |a| {
            *reduced = a.reduced;
            *exponent = a.exponent;
        },
    )
}

/// Relaxation path sampled on a uniform time grid: fills `us[i]` with
/// u(tau_max * i / (len - 1)).
///
/// # Safety
/// `us` must point to at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn anh_flucton_path(
    pot: *const AnhPotential,
    u0: f64,
    tau_max: f64,
    us: *mut f64,
    len: usize,
) -> AnhStatus {
    if pot.is_null() || us.is_null() {
        set_error("NULL argument");
        return AnhStatus::NullArgument;
    }
    let p = &(*pot).0;
    run(
        || flucton::flucton_path(p, u0, tau_max, len),
        |path| {
            let slice = std::slice::from_raw_parts_mut(us, len);
            for (dst, (_, u)) in slice.iter_mut().zip(&path.samples) {
                *dst = *u;
            }
        },
    )
}

/// Log of the two-arm fluctuation determinant ratio.
///
/// # Safety
/// `pot` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn anh_gy_det_log_ratio(
    pot: *const AnhPotential,
    u0: f64,
    t_box: f64,
    out: *mut f64,
) -> AnhStatus {
    if pot.is_null() || out.is_null() {
        set_error("NULL argument");
        return AnhStatus::NullArgument;
    }
    let p = &(*pot).0;
    run(|| flucton::gy_det_log_ratio(p, u0, t_box), |v| *out = v)
}

// ---------------------------------------------------------------------------
// Reference spectra and variational energies.
// ---------------------------------------------------------------------------

/// Cross-checked eigenvalue of the given level.
///
/// # Safety
/// `pot` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn anh_reference_energy(
    pot: *const AnhPotential,
    level: usize,
    out: *mut f64,
) -> AnhStatus {
    if pot.is_null() || out.is_null() {
        set_error("NULL argument");
        return AnhStatus::NullArgument;
    }
    let p = &(*pot).0;
    run(|| reference::reference_energy(p, level), |v| *out = v)
}

/// Optimize the matched trial state (n, parity) of the quartic
/// oscillator at coupling g; returns the variational energy and the
/// optimal parameters.
///
/// # Safety
/// All out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn anh_variational_optimize(
    n: usize,
    parity: usize,
    g: f64,
    energy: *mut f64,
    a: *mut f64,
    b: *mut f64,
) -> AnhStatus {
    if energy.is_null() || a.is_null() || b.is_null() {
        set_error("NULL argument");
        return AnhStatus::NullArgument;
    }
    if parity > 1 {
        set_error("parity must be 0 or 1");
        return AnhStatus::Config;
    }
    run(
        || optimize_params(n, parity, g, &OptimizeOpts::default()),
        |r| {
            *energy = r.energy;
            *a = r.a;
            *b = r.b;
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn potential_round_trip_through_c_abi() {
        unsafe {
            let json = CString::new(
                r#"{"kind":"polynomial","coeffs":{"2":1.0,"4":"1"},"g":1.0,"hbar":1.0,"mass":"half"}"#,
            )
            .unwrap();
            let mut pot: *mut AnhPotential = ptr::null_mut();
            assert_eq!(
                anh_potential_from_json(json.as_ptr(), &mut pot),
                AnhStatus::Ok
            );
            assert!((anh_potential_lambda(pot) - 1.0).abs() < 1e-15);
            assert!((anh_potential_vhat(pot, 2.0) - 20.0).abs() < 1e-13);
            let mut text: *mut c_char = ptr::null_mut();
            assert_eq!(anh_potential_to_json(pot, true, &mut text), AnhStatus::Ok);
            let back = CStr::from_ptr(text).to_str().unwrap().to_string();
            assert!(back.contains("\"4\":\"1\""), "{back}");
            anh_string_free(text);
            anh_potential_free(pot);
        }
    }

    #[test]
    fn rb_series_through_c_abi() {
        unsafe {
            let mut pot: *mut AnhPotential = ptr::null_mut();
            assert_eq!(anh_potential_quartic(1.0, 1.0, &mut pot), AnhStatus::Ok);
            let mut series: *mut AnhRbSeries = ptr::null_mut();
            assert_eq!(anh_rb_series_compute(pot, 4, &mut series), AnhStatus::Ok);
            assert_eq!(anh_rb_series_order(series), 4);
            assert!((anh_rb_series_energy_coeff(series, 2) - 0.75).abs() < 1e-15);
            let mut text: *mut c_char = ptr::null_mut();
            assert_eq!(
                anh_rb_series_energy_coeff_rational(series, 4, &mut text),
                AnhStatus::Ok
            );
            assert_eq!(CStr::from_ptr(text).to_str().unwrap(), "-21/16");
            anh_string_free(text);
            let (mut v, mut idx) = (0.0, 0usize);
            assert_eq!(
                anh_rb_partial_sum(series, 0.1, 2, &mut v, &mut idx),
                AnhStatus::Ok
            );
            assert!((v - 1.0075).abs() < 1e-14);
            anh_rb_series_free(series);
            anh_potential_free(pot);
        }
    }

    #[test]
    fn error_paths_set_messages() {
        unsafe {
            let mut pot: *mut AnhPotential = ptr::null_mut();
            let bad = CString::new(r#"{"kind":"polynomial","coeffs":{"2":1,"3":-2,"4":1},"g":1}"#)
                .unwrap();
            let st = anh_potential_from_json(bad.as_ptr(), &mut pot);
            assert_eq!(st, AnhStatus::Numeric);
            let msg = CStr::from_ptr(anh_last_error_message())
                .to_str()
                .unwrap()
                .to_string();
            assert!(msg.contains("minim"), "unexpected message: {msg}");
            assert_eq!(
                anh_potential_from_json(ptr::null(), &mut pot),
                AnhStatus::NullArgument
            );
        }
    }

    #[test]
    fn numeric_calls_through_c_abi() {
        unsafe {
            let mut pot: *mut AnhPotential = ptr::null_mut();
            assert_eq!(anh_potential_quartic(1.0, 1.0, &mut pot), AnhStatus::Ok);
            let mut v = 0.0;
            assert_eq!(anh_det_log(pot, 1.0, 1.0, &mut v), AnhStatus::Ok);
            assert!(v.is_finite());
            let (mut s, mut e) = (0.0, 0.0);
            assert_eq!(anh_flucton_action(pot, 1.0, &mut s, &mut e), AnhStatus::Ok);
            // int_0^1 sqrt(2(u^2 + u^4)) du = sqrt(2) (2 sqrt(2) - 1)/3
            let expect = 2.0_f64.sqrt() * (2.0 * 2.0_f64.sqrt() - 1.0) / 3.0;
            assert!((s - expect).abs() < 1e-12);
            let mut us = [0.0_f64; 11];
            assert_eq!(
                anh_flucton_path(pot, 1.0, 3.0, us.as_mut_ptr(), us.len()),
                AnhStatus::Ok
            );
            assert_eq!(us[0], 1.0);
            assert!(us[10] < 0.05);
            let mut e_ref = 0.0;
            assert_eq!(anh_reference_energy(pot, 0, &mut e_ref), AnhStatus::Ok);
            assert!((e_ref - 1.392_351_641_530).abs() < 1e-9);
            anh_potential_free(pot);
        }
    }
}
