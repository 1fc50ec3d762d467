//! C ABI for the causality tests: opaque series handles, status codes, and
//! plain structs for test outcomes.
//!
//! Conventions: every fallible function returns a [`GrangerStatus`] and
//! writes its result through an out-pointer that is only touched on
//! `GRANGER_STATUS_OK`. Handles created here must be released with
//! [`granger_series_free`]. A thread-local message for the last error is
//! available through [`granger_last_error_message`]. All functions are
//! panic-safe: a caught panic reports `GRANGER_STATUS_PANIC` instead of
//! unwinding across the boundary.
#![allow(clippy::missing_safety_doc)]

use gls_granger::error::Error;
use gls_granger::pipeline::{classical_granger_test, gls_granger_test, select_lag_aic};
use gls_granger::series::TimeSeries;
use libc::{c_char, c_double, c_int, size_t};
use std::cell::RefCell;
use std::panic::{catch_unwind, AssertUnwindSafe};

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_last_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

/// Status code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrangerStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument violated a precondition; see the last error message.
    InvalidArgument = 2,
    /// A covariance matrix was not positive definite.
    NotPositiveDefinite = 3,
    /// The design matrix was numerically collinear.
    CollinearDesign = 4,
    /// An internal consistency check failed.
    NumericalError = 5,
    /// The callee panicked; state is unchanged.
    Panic = 6,
}

fn status_of(e: &Error) -> GrangerStatus {
    match e {
        Error::InvalidArgument(_) | Error::Parse { .. } | Error::Io { .. } => {
            GrangerStatus::InvalidArgument
        }
        Error::NotPositiveDefinite { .. } => GrangerStatus::NotPositiveDefinite,
        Error::CollinearDesign { .. } => GrangerStatus::CollinearDesign,
        Error::NumericalInconsistency(_) => GrangerStatus::NumericalError,
    }
}

fn guard(f: impl FnOnce() -> GrangerStatus) -> GrangerStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(msg);
            GrangerStatus::Panic
        }
    }
}

/// Opaque handle to an immutable time series.
pub struct GrangerSeries(TimeSeries);

/// Outcome of one causality test.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GrangerTestOutcome {
    pub statistic: c_double,
    pub df1: c_double,
    pub df2: c_double,
    pub p_value: c_double,
    /// 1 when the no-causality null was rejected, else 0.
    pub reject: c_int,
}

/// Creates a series from `len` contiguous doubles. All values must be
/// finite and `len` positive.
#[no_mangle]
pub unsafe extern "C" fn granger_series_create(
    values: *const c_double,
    len: size_t,
    out: *mut *mut GrangerSeries,
) -> GrangerStatus {
    guard(|| {
        if values.is_null() || out.is_null() {
            set_last_error("null pointer argument");
            return GrangerStatus::NullPointer;
        }
        let slice = std::slice::from_raw_parts(values, len);
        match TimeSeries::new(slice.to_vec()) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(GrangerSeries(s)));
                GrangerStatus::Ok
            }
            Err(e) => {
                set_last_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Releases a series handle. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn granger_series_free(series: *mut GrangerSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Number of observations in the series.
#[no_mangle]
pub unsafe extern "C" fn granger_series_len(
    series: *const GrangerSeries,
    out: *mut size_t,
) -> GrangerStatus {
    guard(|| {
        if series.is_null() || out.is_null() {
            set_last_error("null pointer argument");
            return GrangerStatus::NullPointer;
        }
        *out = (*series).0.len();
        GrangerStatus::Ok
    })
}

/// Copies the observations into `buffer` (capacity `cap` doubles) and
/// reports how many were written.
#[no_mangle]
pub unsafe extern "C" fn granger_series_values(
    series: *const GrangerSeries,
    buffer: *mut c_double,
    cap: size_t,
    written: *mut size_t,
) -> GrangerStatus {
    guard(|| {
        if series.is_null() || buffer.is_null() || written.is_null() {
            set_last_error("null pointer argument");
            return GrangerStatus::NullPointer;
        }
        let values = (*series).0.values();
        if cap < values.len() {
            set_last_error(format!(
                "buffer of {cap} doubles cannot hold {} values",
                values.len()
            ));
            return GrangerStatus::InvalidArgument;
        }
        std::ptr::copy_nonoverlapping(values.as_ptr(), buffer, values.len());
        *written = values.len();
        GrangerStatus::Ok
    })
}

/// Differences the series `order` times into a new handle.
#[no_mangle]
pub unsafe extern "C" fn granger_series_difference(
    series: *const GrangerSeries,
    order: size_t,
    out: *mut *mut GrangerSeries,
) -> GrangerStatus {
    guard(|| {
        if series.is_null() || out.is_null() {
            set_last_error("null pointer argument");
            return GrangerStatus::NullPointer;
        }
        match (*series).0.difference(order) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(GrangerSeries(s)));
                GrangerStatus::Ok
            }
            Err(e) => {
                set_last_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

unsafe fn run_test(
    x: *const GrangerSeries,
    y: *const GrangerSeries,
    out: *mut GrangerTestOutcome,
    f: impl FnOnce(
        &TimeSeries,
        &TimeSeries,
    ) -> gls_granger::error::Result<gls_granger::pipeline::CausalityResult>,
) -> GrangerStatus {
    if x.is_null() || y.is_null() || out.is_null() {
        set_last_error("null pointer argument");
        return GrangerStatus::NullPointer;
    }
    match f(&(*x).0, &(*y).0) {
        Ok(r) => {
            *out = GrangerTestOutcome {
                statistic: r.test.statistic,
                df1: r.test.df1,
                df2: r.test.df2,
                p_value: r.test.p_value,
                reject: r.test.reject as c_int,
            };
            GrangerStatus::Ok
        }
        Err(e) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
    }
}

/// Classical Granger F test of "`x` causes `y`" at lag `lag` and
/// significance `alpha`.
#[no_mangle]
pub unsafe extern "C" fn granger_classical_test(
    x: *const GrangerSeries,
    y: *const GrangerSeries,
    lag: size_t,
    alpha: c_double,
    out: *mut GrangerTestOutcome,
) -> GrangerStatus {
    guard(|| run_test(x, y, out, |xs, ys| classical_granger_test(xs, ys, lag, alpha)))
}

/// GLS Granger test of "`x` causes `y`" at lag `lag`, sliding-window
/// length `tau`, and significance `alpha`.
#[no_mangle]
pub unsafe extern "C" fn granger_gls_test(
    x: *const GrangerSeries,
    y: *const GrangerSeries,
    lag: size_t,
    tau: size_t,
    alpha: c_double,
    out: *mut GrangerTestOutcome,
) -> GrangerStatus {
    guard(|| run_test(x, y, out, |xs, ys| gls_granger_test(xs, ys, lag, tau, alpha)))
}

/// Picks the lag in `1..=p_max` minimizing the AIC of the unrestricted
/// model of `y` on both series' lags.
#[no_mangle]
pub unsafe extern "C" fn granger_select_lag_aic(
    x: *const GrangerSeries,
    y: *const GrangerSeries,
    p_max: size_t,
    out: *mut size_t,
) -> GrangerStatus {
    guard(|| {
        if x.is_null() || y.is_null() || out.is_null() {
            set_last_error("null pointer argument");
            return GrangerStatus::NullPointer;
        }
        match select_lag_aic(&(*x).0, &(*y).0, p_max) {
            Ok(p) => {
                *out = p;
                GrangerStatus::Ok
            }
            Err(e) => {
                set_last_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Copies the last error message of this thread into `buffer` (capacity
/// `cap` bytes, always NUL-terminated when `cap > 0`) and returns the full
/// message length in bytes, excluding the terminator.
#[no_mangle]
pub unsafe extern "C" fn granger_last_error_message(
    buffer: *mut c_char,
    cap: size_t,
) -> size_t {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buffer.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buffer, n);
            *buffer.add(n) = 0;
        }
        bytes.len()
    })
}

/// Crate version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn granger_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
