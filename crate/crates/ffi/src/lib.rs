//! C ABI for `lpiso`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` or
//! `*_from_json` and released by the matching `*_free`. Every fallible call
//! returns an [`LpisoStatus`]; on failure the message is available from
//! [`lpiso_last_error`] on the same thread. Strings returned by the library are
//! released with [`lpiso_string_free`]. Norm exponents are passed as `double`,
//! with `INFINITY` standing for the sup norm.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lpiso::{
    homotopy_apply, lamperti_functional, orbit_class, rearrangement_isometry, Error, HomotopyTime,
    LampertiIsometry, NormExponent, OrbitClass, StepFn, SumFn, SumIsometry,
};

/// Bumped on any incompatible change to the exported functions.
pub const LPISO_ABI_VERSION: u32 = 1;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpisoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    DimensionMismatch = 4,
    InvalidInput = 5,
    IncompatibleSpaces = 6,
    NotUnitNorm = 7,
    OrbitMismatch = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpisoOrbitClass {
    FullSupport = 0,
    PartialSupport = 1,
}

pub struct LpisoStepFn(StepFn);
pub struct LpisoLamperti(LampertiIsometry);
pub struct LpisoSumFn(SumFn);
pub struct LpisoSumIsometry(SumIsometry);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(LpisoStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::DimensionMismatch { .. } => LpisoStatus::DimensionMismatch,
            Error::IncompatibleSpaces(_) | Error::UnknownComponent(_) => {
                LpisoStatus::IncompatibleSpaces
            }
            Error::NotUnitNorm(_) => LpisoStatus::NotUnitNorm,
            Error::OrbitMismatch => LpisoStatus::OrbitMismatch,
            _ => LpisoStatus::InvalidInput,
        };
        Failure(status, e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure(LpisoStatus::ParseError, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(LpisoStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> LpisoStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => LpisoStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            LpisoStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_box<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    write(out, Box::into_raw(Box::new(value)), "output handle")
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null("string"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Failure(LpisoStatus::InvalidUtf8, e.to_string()))
}

unsafe fn write_json<T: serde::Serialize>(value: &T, out: *mut *mut c_char) -> Result<(), Failure> {
    let s = serde_json::to_string(value)?;
    let c = CString::new(s).expect("JSON has no nul bytes");
    write(out, c.into_raw(), "output string")
}

fn exponent(q: f64) -> Result<NormExponent, Failure> {
    if q == f64::INFINITY {
        Ok(NormExponent::Infinity)
    } else {
        Ok(NormExponent::finite(q)?)
    }
}

fn check_p(p: f64) -> Result<(), Failure> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p).into())
    }
}

#[no_mangle]
pub extern "C" fn lpiso_abi_version() -> u32 {
    LPISO_ABI_VERSION
}

/// Message of the last failure on this thread, or null. Owned by the library;
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lpiso_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lpiso_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---- step functions ----

/// `values` holds `(n_breaks - 1) * dim` numbers, cell by cell.
///
/// # Safety
/// `breaks` and `values` must point to arrays of the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn lpiso_step_new(
    dim: usize,
    breaks: *const f64,
    n_breaks: usize,
    values: *const f64,
    out: *mut *mut LpisoStepFn,
) -> LpisoStatus {
    guard(|| {
        if breaks.is_null() || values.is_null() {
            return Err(null("breaks or values"));
        }
        if dim == 0 || n_breaks < 2 {
            return Err(Failure(
                LpisoStatus::InvalidInput,
                "need dim >= 1 and at least 2 breaks".into(),
            ));
        }
        let b = std::slice::from_raw_parts(breaks, n_breaks).to_vec();
        let v = std::slice::from_raw_parts(values, (n_breaks - 1) * dim)
            .chunks(dim)
            .map(<[f64]>::to_vec)
            .collect();
        write_box(out, LpisoStepFn(StepFn::with_dim(dim, b, v)?))
    })
}

/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpiso_step_from_json(
    json: *const c_char,
    out: *mut *mut LpisoStepFn,
) -> LpisoStatus {
    guard(|| write_box(out, LpisoStepFn(serde_json::from_str(read_str(json)?)?)))
}

/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpiso_step_to_json(
    f: *const LpisoStepFn,
    out: *mut *mut c_char,
) -> LpisoStatus {
    guard(|| write_json(&borrow(f, "step function")?.0, out))
}

/// # Safety
/// `f` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lpiso_step_free(f: *mut LpisoStepFn) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// # Safety
/// `f` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn lpiso_step_dim(f: *const LpisoStepFn) -> usize {
    f.as_ref().map_or(0, |f| f.0.dim())
}

/// # Safety
/// `f` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn lpiso_step_num_cells(f: *const LpisoStepFn) -> usize {
    f.as_ref().map_or(0, |f| f.0.num_cells())
}

/// Writes `f(x)` into `out[0..len]`; `len` must be at least the dimension.
///
/// # Safety
/// `f` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lpiso_step_eval(
    f: *const LpisoStepFn,
    x: f64,
    out: *mut f64,
    len: usize,
) -> LpisoStatus {
    guard(|| {
        let f = borrow(f, "step function")?;
        if out.is_null() {
            return Err(null("output buffer"));
        }
        if !(0.0..=1.0).contains(&x) {
            return Err(Failure(
                LpisoStatus::InvalidInput,
                format!("x = {x} is outside [0, 1]"),
            ));
        }
        let v = f.0.eval(x);
        if len < v.len() {
            return Err(Failure(
                LpisoStatus::BufferTooSmall,
                format!("need {} values", v.len()),
            ));
        }
        ptr::copy_nonoverlapping(v.as_ptr(), out, v.len());
        Ok(())
    })
}

/// `||f||_{L^p(X)}` with `X = l_q^d`.
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpiso_step_norm(
    f: *const LpisoStepFn,
    p: f64,
    q: f64,
    out: *mut f64,
) -> LpisoStatus {
    guard(|| {
        let f = borrow(f, "step function")?;
        let value = f.0.norm(exponent(p)?, exponent(q)?);
        write(out, value, "output")
    })
}

// ---- Lamperti isometries ----

/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpiso_lamperti_from_json(
    json: *const c_char,
    out: *mut *mut LpisoLamperti,
) -> LpisoStatus {
    guard(|| write_box(out, LpisoLamperti(serde_json::from_str(read_str(json)?)?)))
}

/// # Safety
/// `t` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpiso_lamperti_to_json(
    t: *const LpisoLamperti,
    out: *mut *mut c_char,
) -> LpisoStatus {
    guard(|| write_json(&borrow(t, "isometry")?.0, out))
}

/// # Safety
/// `t` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lpiso_lamperti_free(t: *mut LpisoLamperti) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpiso_lamperti_apply(
    t: *const LpisoLamperti,
    f: *const LpisoStepFn,
    out: *mut *mut LpisoStepFn,
) -> LpisoStatus {
    guard(|| {
        let g = borrow(t, "isometry")?
            .0
            .apply(&borrow(f, "step function")?.0)?;
        write_box(out, LpisoStepFn(g))
    })
}

/// `outer ∘ inner`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpiso_lamperti_compose(
    outer: *const LpisoLamperti,
    inner: *const LpisoLamperti,
    out: *mut *mut LpisoLamperti,
) -> LpisoStatus {
    guard(|| {
        let c = borrow(outer, "isometry")?
            .0
            .compose(&borrow(inner, "isometry")?.0)?;
        write_box(out, LpisoLamperti(c))
    })
}

/// # Safety
/// `t` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpiso_lamperti_invert(
    t: *const LpisoLamperti,
    out: *mut *mut LpisoLamperti,
) -> LpisoStatus {
    guard(|| write_box(out, LpisoLamperti(borrow(t, "isometry")?.0.invert())))
}

// ---- L^p sums ----

/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpiso_sum_from_json(
    json: *const c_char,
    out: *mut *mut LpisoSumFn,
) -> LpisoStatus {
    guard(|| write_box(out, LpisoSumFn(serde_json::from_str(read_str(json)?)?)))
}

/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpiso_sum_to_json(
    f: *const LpisoSumFn,
    out: *mut *mut c_char,
) -> LpisoStatus {
    guard(|| write_json(&borrow(f, "sum")?.0, out))
}

/// # Safety
/// `f` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lpiso_sum_free(f: *mut LpisoSumFn) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpiso_sum_norm(
    f: *const LpisoSumFn,
    p: f64,
    out: *mut f64,
) -> LpisoStatus {
    guard(|| {
        check_p(p)?;
        write(out, borrow(f, "sum")?.0.norm(p), "output")
    })
}

/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpiso_sum_isometry_from_json(
    json: *const c_char,
    out: *mut *mut LpisoSumIsometry,
) -> LpisoStatus {
    guard(|| {
        write_box(
            out,
            LpisoSumIsometry(serde_json::from_str(read_str(json)?)?),
        )
    })
}

/// # Safety
/// `t` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpiso_sum_isometry_to_json(
    t: *const LpisoSumIsometry,
    out: *mut *mut c_char,
) -> LpisoStatus {
    guard(|| write_json(&borrow(t, "isometry")?.0, out))
}

/// # Safety
/// `t` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lpiso_sum_isometry_free(t: *mut LpisoSumIsometry) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpiso_sum_isometry_apply(
    t: *const LpisoSumIsometry,
    f: *const LpisoSumFn,
    out: *mut *mut LpisoSumFn,
) -> LpisoStatus {
    guard(|| {
        let g = borrow(t, "isometry")?.0.apply(&borrow(f, "sum")?.0)?;
        write_box(out, LpisoSumFn(g))
    })
}

/// `h(t, T) F`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpiso_homotopy_apply(
    t: f64,
    op: *const LpisoSumIsometry,
    f: *const LpisoSumFn,
    p: f64,
    out: *mut *mut LpisoSumFn,
) -> LpisoStatus {
    guard(|| {
        check_p(p)?;
        let time = HomotopyTime::new(t)?;
        let g = homotopy_apply(time, &borrow(op, "isometry")?.0, &borrow(f, "sum")?.0, p)?;
        write_box(out, LpisoSumFn(g))
    })
}

// ---- experiments ----

/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpiso_lamperti_functional(
    f: *const LpisoStepFn,
    g: *const LpisoStepFn,
    p: f64,
    q: f64,
    out: *mut f64,
) -> LpisoStatus {
    guard(|| {
        let value = lamperti_functional(
            &borrow(f, "step function")?.0,
            &borrow(g, "step function")?.0,
            p,
            exponent(q)?,
        )?;
        write(out, value, "output")
    })
}

/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpiso_orbit_class(
    f: *const LpisoStepFn,
    p: f64,
    out: *mut LpisoOrbitClass,
) -> LpisoStatus {
    guard(|| {
        let class = match orbit_class(&borrow(f, "step function")?.0, p)? {
            OrbitClass::FullSupport => LpisoOrbitClass::FullSupport,
            OrbitClass::PartialSupport => LpisoOrbitClass::PartialSupport,
        };
        write(out, class, "output")
    })
}

/// An isometry `T` with `T f = g`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lpiso_rearrangement_isometry(
    f: *const LpisoStepFn,
    g: *const LpisoStepFn,
    p: f64,
    out: *mut *mut LpisoLamperti,
) -> LpisoStatus {
    guard(|| {
        let t = rearrangement_isometry(
            &borrow(f, "step function")?.0,
            &borrow(g, "step function")?.0,
            p,
        )?;
        write_box(out, LpisoLamperti(t))
    })
}
