//! C ABI over `hermite_decay`.
//!
//! Every fallible call returns an [`HdStatus`] and writes its result through an
//! out pointer. On failure the message is kept per thread and can be read with
//! [`hd_last_error`]. Handles are opaque and must be released with the
//! matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::OnceLock;

use hermite_decay::oscillator::{evolve, TestFunction};
use hermite_decay::{
    decay_sum, direct_sum, envelope, find_nmax, hermite_exact, phi_coordinate, sharpness_certificate, tail_bound,
    vemuri_decay_check, Error, HermiteCoefficients, SharpnessCertificate, SignedLog, SumParams,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HdStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Precondition = 3,
    InvalidParams = 4,
    BracketFailure = 5,
    Quadrature = 6,
    OutOfRange = 7,
    Panic = 8,
    Other = 9,
}

/// `sign * e^{log_abs}`; zero has `sign == 0` and `log_abs == -inf`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HdSignedLog {
    pub sign: i32,
    pub log_abs: f64,
}

impl From<SignedLog> for HdSignedLog {
    fn from(v: SignedLog) -> Self {
        HdSignedLog {
            sign: v.sign() as i32,
            log_abs: v.logmag(),
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HdNmax {
    pub n_max: f64,
    pub n_max_asymptotic: f64,
    pub a_max: f64,
    pub peak_deviation: f64,
    pub lambda: f64,
    pub phi_max: f64,
    pub truncation_n: u64,
    pub iterations: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HdSharpnessSummary {
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub slope: f64,
    pub window_ratio_min: f64,
    pub points: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HdVemuri {
    /// `+inf` when the coefficients contradict the decay rate.
    pub constant: f64,
    pub retained: u64,
    pub refused: u64,
}

/// `Phi_f(x, t) = (re + i im) e^{log_scale}`, plus the certified tail radius.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HdEvolution {
    pub re: f64,
    pub im: f64,
    pub log_scale: f64,
    pub log_abs: f64,
    pub tail_radius: f64,
}

pub struct HdSumParams(SumParams);

pub struct HdCoefficients(HermiteCoefficients);

pub struct HdSharpness(SharpnessCertificate);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> HdStatus {
    match err {
        Error::Domain { .. } => HdStatus::Domain,
        Error::Precondition { .. } => HdStatus::Precondition,
        Error::InvalidParams { .. } | Error::Config { .. } => HdStatus::InvalidParams,
        Error::BracketFailure { .. } => HdStatus::BracketFailure,
        Error::Quadrature { .. } => HdStatus::Quadrature,
        _ => HdStatus::Other,
    }
}

struct Fail(HdStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(HdStatus::NullPointer, format!("null pointer: {what}"))
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> HdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            HdStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            HdStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn boxed<T>(out: *mut *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(Box::into_raw(Box::new(value)));
    Ok(())
}

/// Copies up to `cap` values into `buf` and returns the total available.
unsafe fn copy_out(src: &[f64], buf: *mut f64, cap: usize) -> usize {
    if !buf.is_null() {
        let n = cap.min(src.len());
        ptr::copy_nonoverlapping(src.as_ptr(), buf, n);
    }
    src.len()
}

/// Message for the last failed call on this thread, or null after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn hd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Version of the underlying library as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hd_version() -> *const c_char {
    static VERSION: OnceLock<CString> = OnceLock::new();
    VERSION
        .get_or_init(|| CString::new(hermite_decay::VERSION).unwrap_or_default())
        .as_ptr()
}

/// Normalized Hermite function `h_n(x)` in signed-log form.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hd_hermite(n: u64, x: f64, out: *mut HdSignedLog) -> HdStatus {
    guard(|| {
        if !x.is_finite() {
            return Err(Fail(HdStatus::Domain, format!("x must be finite, got {x}")));
        }
        write(out, hermite_exact(n, x).into(), "out")
    })
}

/// `phi` with `x = sqrt(2(n+1)) cosh(phi)`; needs `x > sqrt(2(n+1))`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hd_phi(n: f64, x: f64, out: *mut f64) -> HdStatus {
    guard(|| write(out, phi_coordinate(n, x)?.phi, "out"))
}

/// # Safety
/// `out` must be valid for writes. Release the handle with [`hd_sum_params_free`].
#[no_mangle]
pub unsafe extern "C" fn hd_sum_params_new(kappa: f64, beta: f64, y: f64, out: *mut *mut HdSumParams) -> HdStatus {
    guard(|| boxed(out, HdSumParams(SumParams::new(kappa, beta, y)?), "out"))
}

/// # Safety
/// `params` must come from [`hd_sum_params_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hd_sum_params_free(params: *mut HdSumParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// `S(x; kappa, beta, y)` by direct summation.
///
/// # Safety
/// `params` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hd_sum(params: *const HdSumParams, x: f64, out: *mut HdSignedLog) -> HdStatus {
    guard(|| {
        let p = borrow(params, "params")?;
        if !x.is_finite() {
            return Err(Fail(HdStatus::Domain, format!("x must be finite, got {x}")));
        }
        write(out, direct_sum(x, &p.0).into(), "out")
    })
}

/// Partial sum over `first <= n <= last`.
///
/// # Safety
/// `params` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hd_sum_range(
    params: *const HdSumParams,
    x: f64,
    first: u64,
    last: u64,
    out: *mut HdSignedLog,
) -> HdStatus {
    guard(|| {
        let p = borrow(params, "params")?;
        write(out, decay_sum::truncated_sum(x, &p.0, first, last).into(), "out")
    })
}

/// Bound on the tail `sum_{n >= start_n}` of the absolute terms.
///
/// # Safety
/// `params` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hd_tail_bound(
    params: *const HdSumParams,
    start_n: u64,
    x: f64,
    out: *mut HdSignedLog,
) -> HdStatus {
    guard(|| {
        let p = borrow(params, "params")?;
        write(out, tail_bound(start_n, x, &p.0).into(), "out")
    })
}

/// `x^{1/2 - 2 beta} e^{-kappa x^2 tanh(y) / 2}`.
///
/// # Safety
/// `params` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hd_envelope(params: *const HdSumParams, x: f64, out: *mut HdSignedLog) -> HdStatus {
    guard(|| {
        let p = borrow(params, "params")?;
        write(out, envelope(x, &p.0)?.into(), "out")
    })
}

/// Maximizer of the argument function at `(x, y)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hd_find_nmax(x: f64, y: f64, out: *mut HdNmax) -> HdStatus {
    guard(|| {
        let prof = find_nmax(x, y)?;
        let r = HdNmax {
            n_max: prof.n_max,
            n_max_asymptotic: prof.n_max_asymptotic(),
            a_max: prof.a_max,
            peak_deviation: prof.peak_deviation(),
            lambda: prof.lambda,
            phi_max: prof.phi_max,
            truncation_n: prof.truncation_n,
            iterations: prof.iterations as u64,
        };
        write(out, r, "out")
    })
}

/// Sharpness sweep over `x_grid[0..len]`.
///
/// # Safety
/// `params` must be a live handle, `x_grid` valid for `len` reads and `out`
/// valid for writes. Release the result with [`hd_sharpness_free`].
#[no_mangle]
pub unsafe extern "C" fn hd_sharpness_new(
    params: *const HdSumParams,
    x_grid: *const f64,
    len: usize,
    out: *mut *mut HdSharpness,
) -> HdStatus {
    guard(|| {
        let p = borrow(params, "params")?;
        let xs = slice(x_grid, len, "x_grid")?;
        boxed(out, HdSharpness(sharpness_certificate(xs, &p.0)?), "out")
    })
}

/// # Safety
/// `cert` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hd_sharpness_summary(cert: *const HdSharpness, out: *mut HdSharpnessSummary) -> HdStatus {
    guard(|| {
        let c = &borrow(cert, "cert")?.0;
        let s = HdSharpnessSummary {
            ratio_min: c.ratio_min,
            ratio_max: c.ratio_max,
            slope: c.slope,
            window_ratio_min: c.window_ratio_min,
            points: c.ratios.len() as u64,
        };
        write(out, s, "out")
    })
}

/// Copies up to `cap` ratios into `buf` (which may be null) and returns the
/// number of grid points, or 0 for a null handle.
///
/// # Safety
/// `cert` must be a live handle or null; `buf` valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn hd_sharpness_ratios(cert: *const HdSharpness, buf: *mut f64, cap: usize) -> usize {
    match cert.as_ref() {
        Some(c) => copy_out(&c.0.ratios, buf, cap),
        None => 0,
    }
}

/// # Safety
/// `cert` must come from [`hd_sharpness_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hd_sharpness_free(cert: *mut HdSharpness) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}

/// Expansion of `e^{-tanh(2 alpha) pi x^2}` in the rescaled Hermite basis.
///
/// # Safety
/// `out` must be valid for writes. Release with [`hd_coefficients_free`].
#[no_mangle]
pub unsafe extern "C" fn hd_coefficients_gaussian(
    alpha: f64,
    n_terms: usize,
    out: *mut *mut HdCoefficients,
) -> HdStatus {
    guard(|| {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Fail(
                HdStatus::InvalidParams,
                format!("alpha must be positive, got {alpha}"),
            ));
        }
        let c = TestFunction::hardy_gaussian(alpha).expand(n_terms)?;
        c.check_converged()?;
        boxed(out, HdCoefficients(c), "out")
    })
}

/// Wraps caller-supplied exact coefficients.
///
/// # Safety
/// `coeffs` must be valid for `len` reads and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hd_coefficients_from_array(
    coeffs: *const f64,
    len: usize,
    out: *mut *mut HdCoefficients,
) -> HdStatus {
    guard(|| {
        let xs = slice(coeffs, len, "coeffs")?;
        if let Some(bad) = xs.iter().position(|c| !c.is_finite()) {
            return Err(Fail(HdStatus::Domain, format!("coefficient {bad} is not finite")));
        }
        boxed(out, HdCoefficients(HermiteCoefficients::from_exact(xs.to_vec())), "out")
    })
}

/// Number of coefficients, or 0 for a null handle.
///
/// # Safety
/// `coeffs` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hd_coefficients_len(coeffs: *const HdCoefficients) -> usize {
    coeffs.as_ref().map_or(0, |c| c.0.len())
}

/// # Safety
/// `coeffs` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hd_coefficients_get(coeffs: *const HdCoefficients, n: usize, out: *mut f64) -> HdStatus {
    guard(|| {
        let c = &borrow(coeffs, "coeffs")?.0;
        let v = *c
            .coeffs()
            .get(n)
            .ok_or_else(|| Fail(HdStatus::OutOfRange, format!("index {n} >= length {}", c.len())))?;
        write(out, v, "out")
    })
}

/// Copies up to `cap` per-coefficient quadrature errors into `buf` and returns
/// the total count.
///
/// # Safety
/// `coeffs` must be a live handle or null; `buf` valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn hd_coefficients_quad_error(coeffs: *const HdCoefficients, buf: *mut f64, cap: usize) -> usize {
    match coeffs.as_ref() {
        Some(c) => copy_out(c.0.quad_error(), buf, cap),
        None => 0,
    }
}

/// Smallest `C` with `|c_n| <= C e^{-alpha n} max(n,1)^{-1/4}` on the resolved prefix.
///
/// # Safety
/// `coeffs` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hd_vemuri_check(coeffs: *const HdCoefficients, alpha: f64, out: *mut HdVemuri) -> HdStatus {
    guard(|| {
        let c = &borrow(coeffs, "coeffs")?.0;
        let v = vemuri_decay_check(c, alpha)?;
        let r = HdVemuri {
            constant: v.constant,
            retained: v.retained as u64,
            refused: v.refused.len() as u64,
        };
        write(out, r, "out")
    })
}

/// New handle holding the certified prefix, with the decay bound as its tail.
///
/// # Safety
/// `coeffs` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hd_coefficients_certify(
    coeffs: *const HdCoefficients,
    alpha: f64,
    out: *mut *mut HdCoefficients,
) -> HdStatus {
    guard(|| {
        let c = &borrow(coeffs, "coeffs")?.0;
        boxed(out, HdCoefficients(c.certify(alpha)?), "out")
    })
}

/// `Phi_f(x, t)` for the harmonic-oscillator evolution of the expansion.
///
/// # Safety
/// `coeffs` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hd_evolve(coeffs: *const HdCoefficients, x: f64, t: f64, out: *mut HdEvolution) -> HdStatus {
    guard(|| {
        let c = &borrow(coeffs, "coeffs")?.0;
        if !(x.is_finite() && t.is_finite()) {
            return Err(Fail(
                HdStatus::Domain,
                format!("x and t must be finite, got ({x}, {t})"),
            ));
        }
        let e = evolve(c, x, t);
        let r = HdEvolution {
            re: e.scaled.re,
            im: e.scaled.im,
            log_scale: e.log_scale,
            log_abs: e.log_abs(),
            tail_radius: e.tail_radius(),
        };
        write(out, r, "out")
    })
}

/// # Safety
/// `coeffs` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hd_coefficients_free(coeffs: *mut HdCoefficients) {
    if !coeffs.is_null() {
        drop(Box::from_raw(coeffs));
    }
}
