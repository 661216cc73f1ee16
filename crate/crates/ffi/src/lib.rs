//! C interface to `freud-core`.
//!
//! Parameters and coefficient tables live behind opaque handles created by
//! `*_new` and released by `*_free`. Every function returns a [`FreudStatus`];
//! results are written through out-pointers. On failure the message is kept
//! per thread and can be fetched with [`freud_last_error`].
//!
//! Strings are copied into caller buffers. When a buffer is too small the
//! call returns `FREUD_STATUS_BUFFER_TOO_SMALL` and stores the required size,
//! including the terminating NUL, in `*needed`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use freud_core::hankel::RecurrenceTable;
use freud_core::moments::{moment, WeightParams};
use freud_core::oracle::{self, QuadratureSpec};
use freud_core::painleve::{beta_forward, freud_limit, string_residual};
use freud_core::zeros::{zeros, DensityLaw};
use freud_core::{BigReal, FreudError};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FreudStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NumericalFailure = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FreudMethod {
    Hankel = 0,
    Painleve = 1,
    Oracle = 2,
}

/// Weight parameters (m, t, λ) and working precision.
pub struct FreudParams(WeightParams);

/// Recurrence coefficients β_1 … β_N.
pub struct FreudRecurrence(RecurrenceTable);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

struct Failure(FreudStatus, String);

impl From<FreudError> for Failure {
    fn from(e: FreudError) -> Self {
        let status = if e.is_validation() {
            FreudStatus::InvalidArgument
        } else {
            FreudStatus::NumericalFailure
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(FreudStatus::InvalidArgument, msg.into())
}

fn null(what: &str) -> Failure {
    Failure(FreudStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FreudStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FreudStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            FreudStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn c_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

/// Copies `text` and a NUL into `buf`; `needed` receives the full size.
unsafe fn copy_out(text: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> Result<(), Failure> {
    let size = text.len() + 1;
    if !needed.is_null() {
        needed.write(size);
    }
    if buf.is_null() {
        return Err(null("buf"));
    }
    if len < size {
        return Err(Failure(
            FreudStatus::BufferTooSmall,
            format!("buffer holds {len} bytes, {size} needed"),
        ));
    }
    std::ptr::copy_nonoverlapping(text.as_ptr().cast::<c_char>(), buf, text.len());
    buf.add(text.len()).write(0);
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn freud_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message raised on this thread into `buf`.
///
/// # Safety
/// `buf` must be valid for `len` bytes; `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn freud_last_error(buf: *mut c_char, len: usize, needed: *mut usize) -> FreudStatus {
    let text = LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map(|c| c.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    // Not routed through guard: a failure here must not replace the message.
    match copy_out(&text, buf, len, needed) {
        Ok(()) => FreudStatus::Ok,
        Err(Failure(status, _)) => status,
    }
}

/// Creates a parameter handle. `t` and `lambda` are exact decimals or
/// fractions such as "-0.5" or "1/3"; `bits` of 0 selects 256.
///
/// # Safety
/// `t` and `lambda` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn freud_params_new(
    m: u32,
    t: *const c_char,
    lambda: *const c_char,
    bits: u32,
    out: *mut *mut FreudParams,
) -> FreudStatus {
    guard(|| {
        let t = c_str(t, "t")?;
        let lambda = c_str(lambda, "lambda")?;
        let bits = if bits == 0 { freud_core::scalar::DEFAULT_PRECISION } else { bits };
        let params = WeightParams::parse(m, t, lambda, bits)?;
        write(out, Box::into_raw(Box::new(FreudParams(params))), "out")
    })
}

/// Releases a parameter handle; null is ignored.
///
/// # Safety
/// `params` must come from [`freud_params_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn freud_params_free(params: *mut FreudParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// μ_0, the total mass of the weight.
///
/// # Safety
/// `params` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn freud_mu0(params: *const FreudParams, out: *mut f64) -> FreudStatus {
    freud_moment(params, 0, out)
}

/// The moment μ_k; odd k gives 0.
///
/// # Safety
/// `params` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn freud_moment(params: *const FreudParams, k: usize, out: *mut f64) -> FreudStatus {
    guard(|| {
        let p = deref(params, "params")?;
        let v = moment(&p.0, k)?;
        write(out, v.to_f64(), "out")
    })
}

/// Computes β_1 … β_count by the chosen method.
///
/// # Safety
/// `params` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn freud_recurrence_new(
    params: *const FreudParams,
    count: usize,
    method: FreudMethod,
    out: *mut *mut FreudRecurrence,
) -> FreudStatus {
    guard(|| {
        let p = &deref(params, "params")?.0;
        if count == 0 {
            return Err(invalid("count must be positive"));
        }
        let table = match method {
            FreudMethod::Hankel => RecurrenceTable::from_hankel(p, count)?,
            FreudMethod::Painleve => {
                let seeds = RecurrenceTable::from_hankel(p, (p.m() - 1) as usize)?;
                beta_forward(p, seeds.betas(), count)?
            }
            FreudMethod::Oracle => {
                let tol = 2f64.powi(-(p.precision_bits() as i32) / 2).max(1e-30);
                oracle::recurrence(p, count, &QuadratureSpec::with_tol(tol))?
            }
        };
        write(out, Box::into_raw(Box::new(FreudRecurrence(table))), "out")
    })
}

/// Releases a recurrence handle; null is ignored.
///
/// # Safety
/// `rec` must come from [`freud_recurrence_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn freud_recurrence_free(rec: *mut FreudRecurrence) {
    if !rec.is_null() {
        drop(Box::from_raw(rec));
    }
}

/// Number of coefficients held; forward generation may stop short of the request.
///
/// # Safety
/// `rec` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn freud_recurrence_len(rec: *const FreudRecurrence, out: *mut usize) -> FreudStatus {
    guard(|| write(out, deref(rec, "rec")?.0.len(), "out"))
}

/// Precision in bits at which the table was computed.
///
/// # Safety
/// `rec` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn freud_recurrence_precision(rec: *const FreudRecurrence, out: *mut u32) -> FreudStatus {
    guard(|| write(out, deref(rec, "rec")?.0.precision_bits(), "out"))
}

/// β_n rounded to double.
///
/// # Safety
/// `rec` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn freud_beta(rec: *const FreudRecurrence, n: usize, out: *mut f64) -> FreudStatus {
    guard(|| {
        let b = deref(rec, "rec")?.0.beta(n)?;
        write(out, b.to_f64(), "out")
    })
}

/// β_n as a decimal string with round-trip digits.
///
/// # Safety
/// `rec` must be a live handle; `buf` must be valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn freud_beta_str(
    rec: *const FreudRecurrence,
    n: usize,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> FreudStatus {
    guard(|| {
        let b = deref(rec, "rec")?.0.beta(n)?;
        copy_out(&b.to_decimal(), buf, len, needed)
    })
}

/// |2m V_n − 2t β_n − n − (λ + ½)(1 − (−1)^n)| for the stored table.
///
/// # Safety
/// `rec` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn freud_string_residual(rec: *const FreudRecurrence, n: usize, out: *mut f64) -> FreudStatus {
    guard(|| {
        let r = string_residual(&deref(rec, "rec")?.0, n)?;
        write(out, r.to_f64(), "out")
    })
}

/// The n zeros of P_n in ascending order, written to `out[0..n]`.
/// `tol` of 0 selects 2^(−bits/2).
///
/// # Safety
/// `rec` must be a live handle; `out` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn freud_zeros(
    rec: *const FreudRecurrence,
    n: usize,
    tol: f64,
    out: *mut f64,
    len: usize,
) -> FreudStatus {
    guard(|| {
        let table = &deref(rec, "rec")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        if len < n {
            return Err(Failure(
                FreudStatus::BufferTooSmall,
                format!("output holds {len} values, {n} needed"),
            ));
        }
        let tol = if tol == 0.0 {
            2f64.powi(-(table.precision_bits() as i32) / 2)
        } else {
            tol
        };
        let set = zeros(table, n, tol)?;
        for (i, z) in set.zeros.iter().enumerate() {
            out.add(i).write(z.to_f64());
        }
        Ok(())
    })
}

/// The limiting zero density at x for exponent 2m and ratio ℓ = n/N.
/// Points outside the support give 0.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn freud_density(m: u32, ell: f64, x: f64, out: *mut f64) -> FreudStatus {
    guard(|| {
        if !x.is_finite() {
            return Err(invalid("x must be finite"));
        }
        let law = DensityLaw::new(m, ell, 128)?;
        let x = BigReal::from_f64(x, 128);
        let v = if x.abs() >= law.c { 0.0 } else { law.density(&x)?.to_f64() };
        write(out, v, "out")
    })
}

/// lim β_n / n^{1/m} as n → ∞.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn freud_limit_value(m: u32, out: *mut f64) -> FreudStatus {
    guard(|| {
        if m < 2 {
            return Err(invalid(format!("m must be at least 2, got {m}")));
        }
        write(out, freud_limit(m, 128).to_f64(), "out")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_are_contained() {
        let status = guard(|| panic!("boom"));
        assert_eq!(status, FreudStatus::Panic);
        let mut buf = [0 as c_char; 64];
        let mut needed = 0usize;
        assert_eq!(unsafe { freud_last_error(buf.as_mut_ptr(), buf.len(), &mut needed) }, FreudStatus::Ok);
        let msg = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
        assert_eq!(msg, "panic: boom");
        assert_eq!(needed, msg.len() + 1);
    }
}
