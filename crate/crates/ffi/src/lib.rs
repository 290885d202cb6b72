//! C interface to the `uavcov` coverage engine.
//!
//! Parameters live behind an opaque [`UavcovParams`] handle. Every fallible
//! call returns a [`UavcovStatus`] and writes its result through an out
//! pointer; on failure [`uavcov_last_error`] describes what went wrong on the
//! calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use uavcov::coverage::{self, Scheme};
use uavcov::geometry::HoleGeometry;
use uavcov::interference::LaplaceContext;
use uavcov::{montecarlo, Error, SystemParams};

pub const UAVCOV_SCHEME_PROPOSED: c_int = 0;
pub const UAVCOV_SCHEME_UAV_ONLY: c_int = 1;
pub const UAVCOV_SCHEME_GROUND_ONLY: c_int = 2;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UavcovStatus {
    Ok = 0,
    NullPointer = 1,
    /// The parameter set violates an invariant.
    InvalidParams = 2,
    /// An argument lies outside the function's domain.
    Domain = 3,
    /// Adaptive quadrature missed its tolerance.
    Integration = 4,
    /// Malformed TOML, key, value or string encoding.
    Parse = 5,
    Io = 6,
    /// A Rust panic was caught at the boundary.
    Panic = 7,
}

/// Opaque parameter set.
pub struct UavcovParams {
    inner: SystemParams,
}

/// Coverage split by serving class.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UavcovCoverage {
    pub pc1: f64,
    pub pc2: f64,
    pub pc3: f64,
    pub total: f64,
}

/// Expected shares of the disc served by each class.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UavcovAreaFractions {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
}

/// A simulated probability with its 95% confidence half-width.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UavcovEstimate {
    pub estimate: f64,
    pub half_width: f64,
    pub samples: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> UavcovStatus {
    match err {
        Error::Domain(_) => UavcovStatus::Domain,
        Error::InvalidParams(_) => UavcovStatus::InvalidParams,
        Error::Config(_) => UavcovStatus::Parse,
        Error::Integration { .. } => UavcovStatus::Integration,
        Error::Io(_) => UavcovStatus::Io,
    }
}

/// Failure inside a call: a status plus its message.
struct Failure(UavcovStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

/// Runs `body`, recording any failure or panic as the thread's last error.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> UavcovStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            UavcovStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            UavcovStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(UavcovStatus::NullPointer, format!("{what} is null"))
}

unsafe fn params_ref<'a>(p: *const UavcovParams) -> Result<&'a SystemParams, Failure> {
    unsafe { p.as_ref() }.map(|h| &h.inner).ok_or_else(|| null("params"))
}

unsafe fn out_mut<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    unsafe { p.as_mut() }.ok_or_else(|| null("output pointer"))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|e| Failure(UavcovStatus::Parse, format!("{what} is not UTF-8: {e}")))
}

fn scheme_of(code: c_int) -> Result<Scheme, Failure> {
    match code {
        UAVCOV_SCHEME_PROPOSED => Ok(Scheme::Proposed),
        UAVCOV_SCHEME_UAV_ONLY => Ok(Scheme::UavOnly),
        UAVCOV_SCHEME_GROUND_ONLY => Ok(Scheme::GroundOnly),
        other => Err(Failure(UavcovStatus::Domain, format!("unknown scheme code {other}"))),
    }
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn uavcov_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn uavcov_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// A handle holding the default parameter set. Release with
/// [`uavcov_params_free`].
#[no_mangle]
pub extern "C" fn uavcov_params_new_default() -> *mut UavcovParams {
    Box::into_raw(Box::new(UavcovParams {
        inner: SystemParams::default(),
    }))
}

/// Parses a TOML document into a new handle stored in `*out`.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn uavcov_params_from_toml(toml: *const c_char, out: *mut *mut UavcovParams) -> UavcovStatus {
    guard(|| {
        let out = unsafe { out_mut(out) }?;
        *out = ptr::null_mut();
        let text = unsafe { c_str(toml, "toml") }?;
        let inner = SystemParams::from_toml_str(text)?;
        *out = Box::into_raw(Box::new(UavcovParams { inner }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `params` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn uavcov_params_free(params: *mut UavcovParams) {
    if !params.is_null() {
        drop(unsafe { Box::from_raw(params) });
    }
}

/// Sets one field from its textual value, using the config key names.
///
/// # Safety
/// `params` must be a live handle; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn uavcov_params_set(
    params: *mut UavcovParams,
    key: *const c_char,
    value: *const c_char,
) -> UavcovStatus {
    guard(|| {
        let handle = unsafe { params.as_mut() }.ok_or_else(|| null("params"))?;
        let key = unsafe { c_str(key, "key") }?;
        let value = unsafe { c_str(value, "value") }?;
        handle.inner.set(key, value)?;
        Ok(())
    })
}

/// Reads one field as a double.
///
/// # Safety
/// `params` must be a live handle, `key` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uavcov_params_get(params: *const UavcovParams, key: *const c_char, out: *mut f64) -> UavcovStatus {
    guard(|| {
        let p = unsafe { params_ref(params) }?;
        let key = unsafe { c_str(key, "key") }?;
        let out = unsafe { out_mut(out) }?;
        *out = p.get(key)?;
        Ok(())
    })
}

/// Checks every invariant; the message lists all violations.
///
/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn uavcov_params_validate(params: *const UavcovParams) -> UavcovStatus {
    guard(|| {
        unsafe { params_ref(params) }?.validated()?;
        Ok(())
    })
}

/// Coverage of a user at distance `r0` from the disc centre under `scheme`.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uavcov_conditional_coverage(
    params: *const UavcovParams,
    scheme: c_int,
    r0: f64,
    out: *mut UavcovCoverage,
) -> UavcovStatus {
    guard(|| {
        let p = unsafe { params_ref(params) }?;
        let out = unsafe { out_mut(out) }?;
        let c = coverage::scheme_coverage(p, scheme_of(scheme)?, r0)?;
        *out = UavcovCoverage {
            pc1: c.pc1,
            pc2: c.pc2,
            pc3: c.pc3,
            total: c.total,
        };
        Ok(())
    })
}

/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uavcov_area_fractions(params: *const UavcovParams, out: *mut UavcovAreaFractions) -> UavcovStatus {
    guard(|| {
        let p = unsafe { params_ref(params) }?;
        let out = unsafe { out_mut(out) }?;
        let [f1, f2, f3] = coverage::area_fractions(p)?.fractions();
        *out = UavcovAreaFractions { f1, f2, f3 };
        Ok(())
    })
}

/// Normalized spectral efficiency in nats per channel use per station.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uavcov_nse(params: *const UavcovParams, scheme: c_int, out: *mut f64) -> UavcovStatus {
    guard(|| {
        let p = unsafe { params_ref(params) }?;
        let out = unsafe { out_mut(out) }?;
        *out = coverage::nse_report(p, scheme_of(scheme)?)?.nse;
        Ok(())
    })
}

/// CDF of the nearest-station distance for a user at `r0`.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uavcov_nearest_bs_cdf(params: *const UavcovParams, r0: f64, r: f64, out: *mut f64) -> UavcovStatus {
    guard(|| {
        let p = unsafe { params_ref(params) }?;
        let out = unsafe { out_mut(out) }?;
        *out = HoleGeometry::from_params(p, r0)?.nearest_bs_cdf(r);
        Ok(())
    })
}

/// Density of the nearest-station distance for a user at `r0`.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uavcov_nearest_bs_pdf(params: *const UavcovParams, r0: f64, r: f64, out: *mut f64) -> UavcovStatus {
    guard(|| {
        let p = unsafe { params_ref(params) }?;
        let out = unsafe { out_mut(out) }?;
        *out = HoleGeometry::from_params(p, r0)?.nearest_bs_pdf(r);
        Ok(())
    })
}

/// Laplace transform at `s` of the interference beyond the nearest station
/// at `r1`, for a user at `r0`.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uavcov_laplace_i2(
    params: *const UavcovParams,
    r0: f64,
    r1: f64,
    s: f64,
    out: *mut f64,
) -> UavcovStatus {
    guard(|| {
        let p = unsafe { params_ref(params) }?;
        let out = unsafe { out_mut(out) }?;
        *out = LaplaceContext::new(p, r0, r1)?.laplace_i2(s)?;
        Ok(())
    })
}

/// Monte Carlo coverage of a user at `r0` from `drops` seeded network drops.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uavcov_estimate_coverage(
    params: *const UavcovParams,
    scheme: c_int,
    r0: f64,
    drops: u64,
    seed: u64,
    out: *mut UavcovEstimate,
) -> UavcovStatus {
    guard(|| {
        let p = unsafe { params_ref(params) }?;
        let out = unsafe { out_mut(out) }?;
        let e = montecarlo::estimate_scheme_coverage(p, scheme_of(scheme)?, r0, drops, seed)?;
        *out = UavcovEstimate {
            estimate: e.estimate,
            half_width: e.half_width,
            samples: e.samples,
        };
        Ok(())
    })
}
