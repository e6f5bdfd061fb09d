//! C ABI for `zonalhop`.
//!
//! Every function returns a [`ZhStatus`]; results go through out-pointers.
//! Kernels and interpolants are opaque handles released with their `_free`
//! function. After a failure, `zh_last_error_message` describes it.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use zonalhop::gegenbauer;
use zonalhop::interpolation::{solve_interpolation, Interpolant};
use zonalhop::spd::PointSet;
use zonalhop::transform::fourier_transform;
use zonalhop::{Error, GegenbauerParams, Kernel, KernelDescriptor};

/// Status codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZhStatus {
    Ok = 0,
    InvalidArgument = 1,
    UnsupportedIndex = 2,
    ResourceLimit = 3,
    EvaluationFailed = 4,
    AccuracyNotReached = 5,
    NotPositiveDefinite = 6,
    Internal = 7,
    NullPointer = 8,
    Panic = 9,
}

/// Opaque kernel handle.
pub struct ZhKernel {
    kernel: Kernel,
}

/// Opaque interpolant handle.
pub struct ZhInterpolant {
    itp: Interpolant,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ZhStatus {
    match e {
        Error::Argument(_) => ZhStatus::InvalidArgument,
        Error::UnsupportedIndex { .. } => ZhStatus::UnsupportedIndex,
        Error::Resource(_) => ZhStatus::ResourceLimit,
        Error::Evaluation { .. } => ZhStatus::EvaluationFailed,
        Error::Accuracy { .. } => ZhStatus::AccuracyNotReached,
        Error::NotPositiveDefinite { .. } => ZhStatus::NotPositiveDefinite,
        Error::Internal(_) => ZhStatus::Internal,
    }
}

enum Fail {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> ZhStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => ZhStatus::Ok,
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer passed for {what}"));
            ZhStatus::NullPointer
        }
        Err(_) => {
            set_error("internal panic".to_string());
            ZhStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, what: &'static str) -> Result<(), Fail> {
    if p.is_null() {
        Err(Fail::Null(what))
    } else {
        Ok(())
    }
}

fn params_or_none(lambda: f64) -> Result<Option<GegenbauerParams>, Fail> {
    if lambda.is_nan() {
        Ok(None)
    } else {
        Ok(Some(GegenbauerParams::new(lambda)?))
    }
}

/// Message for the most recent failure on this thread, or NULL. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn zh_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn zh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `C^λ_n(x)`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn zh_gegenbauer_eval(
    lambda: f64,
    n: usize,
    x: f64,
    out: *mut f64,
) -> ZhStatus {
    guard(|| {
        non_null(out, "out")?;
        let v = gegenbauer::eval(GegenbauerParams::new(lambda)?, n, x)?;
        *out = v;
        Ok(())
    })
}

/// Build a kernel from a JSON descriptor. `lambda` is used by `series`
/// descriptors without their own index; pass NaN for none.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn zh_kernel_from_json(
    json: *const c_char,
    lambda: f64,
    out: *mut *mut ZhKernel,
) -> ZhStatus {
    guard(|| {
        non_null(json, "json")?;
        non_null(out, "out")?;
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| Error::Argument("descriptor is not UTF-8".into()))?;
        let kernel = KernelDescriptor::from_json(text)?.build(params_or_none(lambda)?)?;
        *out = Box::into_raw(Box::new(ZhKernel { kernel }));
        Ok(())
    })
}

/// # Safety
/// `kernel` must come from `zh_kernel_from_json` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn zh_kernel_free(kernel: *mut ZhKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// Kernel value at `x ∈ [-1, 1]`.
///
/// # Safety
/// `kernel` must be a live handle; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn zh_kernel_eval(
    kernel: *const ZhKernel,
    x: f64,
    out: *mut f64,
) -> ZhStatus {
    guard(|| {
        non_null(kernel, "kernel")?;
        non_null(out, "out")?;
        let x = gegenbauer::clamp_unit(x)?;
        let v = (*kernel).kernel.eval(x);
        if !v.is_finite() {
            return Err(Error::Evaluation { x }.into());
        }
        *out = v;
        Ok(())
    })
}

/// Transform values `f̂_λ(0..=n_max)` written to `out[0..=n_max]`.
///
/// # Safety
/// `kernel` must be a live handle; `out` valid for `n_max + 1` writes.
#[no_mangle]
pub unsafe extern "C" fn zh_kernel_fourier_coeffs(
    kernel: *const ZhKernel,
    lambda: f64,
    n_max: usize,
    order: usize,
    out: *mut f64,
) -> ZhStatus {
    guard(|| {
        non_null(kernel, "kernel")?;
        non_null(out, "out")?;
        let t = fourier_transform(
            (*kernel).kernel.as_ref(),
            GegenbauerParams::new(lambda)?,
            n_max,
            order,
        )?;
        slice::from_raw_parts_mut(out, n_max + 1).copy_from_slice(t.as_slice());
        Ok(())
    })
}

/// Solve an interpolation problem on `S^d`. `points` holds `n` rows of
/// `d + 1` coordinates, row-major.
///
/// # Safety
/// `points` must hold `n (d + 1)` values, `values` `n` values; `out` valid
/// for one write.
#[no_mangle]
pub unsafe extern "C" fn zh_interpolant_solve(
    kernel: *const ZhKernel,
    points: *const f64,
    n: usize,
    d: usize,
    values: *const f64,
    out: *mut *mut ZhInterpolant,
) -> ZhStatus {
    guard(|| {
        non_null(kernel, "kernel")?;
        non_null(points, "points")?;
        non_null(values, "values")?;
        non_null(out, "out")?;
        let width = d + 1;
        let flat = slice::from_raw_parts(points, n * width);
        let pts = PointSet::new(d, flat.chunks(width).map(<[f64]>::to_vec).collect())?;
        let data = slice::from_raw_parts(values, n);
        let itp = solve_interpolation(&pts, data, (*kernel).kernel.clone())?;
        *out = Box::into_raw(Box::new(ZhInterpolant { itp }));
        Ok(())
    })
}

/// # Safety
/// `itp` must come from `zh_interpolant_solve` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn zh_interpolant_free(itp: *mut ZhInterpolant) {
    if !itp.is_null() {
        drop(Box::from_raw(itp));
    }
}

/// Number of centers.
///
/// # Safety
/// `itp` must be a live handle; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn zh_interpolant_len(
    itp: *const ZhInterpolant,
    out: *mut usize,
) -> ZhStatus {
    guard(|| {
        non_null(itp, "interpolant")?;
        non_null(out, "out")?;
        *out = (*itp).itp.coefficients.len();
        Ok(())
    })
}

/// Copy the coefficients into `out[0..len]`; `len` must equal the center
/// count.
///
/// # Safety
/// `itp` must be a live handle; `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn zh_interpolant_coefficients(
    itp: *const ZhInterpolant,
    out: *mut f64,
    len: usize,
) -> ZhStatus {
    guard(|| {
        non_null(itp, "interpolant")?;
        non_null(out, "out")?;
        let c = &(*itp).itp.coefficients;
        if len != c.len() {
            return Err(
                Error::Argument(format!("buffer holds {len} values, need {}", c.len())).into(),
            );
        }
        slice::from_raw_parts_mut(out, len).copy_from_slice(c);
        Ok(())
    })
}

/// `s(x)` at a unit vector of `len` coordinates.
///
/// # Safety
/// `itp` must be a live handle; `x` must hold `len` values; `out` valid for
/// one write.
#[no_mangle]
pub unsafe extern "C" fn zh_interpolant_eval(
    itp: *const ZhInterpolant,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> ZhStatus {
    guard(|| {
        non_null(itp, "interpolant")?;
        non_null(x, "x")?;
        non_null(out, "out")?;
        *out = (*itp).itp.evaluate(slice::from_raw_parts(x, len))?;
        Ok(())
    })
}
