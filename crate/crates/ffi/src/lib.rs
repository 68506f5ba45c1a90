//! C ABI over the odemmse core: opaque handles, integer status codes, and
//! caller-freed strings. The generated header lives in `include/odemmse.h`.

use std::ffi::{c_char, CStr, CString};

use odemmse::mimo::{rng_stream, sample_channel, ChannelMatrix, SystemConfig};
use odemmse::mse;
use odemmse::schedules::RegularizationSchedule;
use odemmse::spectral::{gram_eigensystem, GramEigenSystem};
use odemmse::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdemmseStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NumericalFailure = 3,
    ParseFailure = 4,
}

/// A channel realization with its cached Gram eigendecomposition.
pub struct OdemmseChannel {
    matrix: ChannelMatrix,
    eig: GramEigenSystem,
}

/// A regularization schedule eta(t).
pub struct OdemmseSchedule {
    inner: RegularizationSchedule,
}

thread_local! {
    static LAST_ERROR: std::cell::RefCell<String> = const { std::cell::RefCell::new(String::new()) };
}

fn fail(e: Error) -> OdemmseStatus {
    let status = match &e {
        Error::InvalidConfig(_) | Error::DimensionMismatch { .. } => OdemmseStatus::InvalidArgument,
        Error::ChannelParse(_) | Error::Io(_) => OdemmseStatus::ParseFailure,
        Error::EigenFailure | Error::QuadratureNonConvergence { .. } | Error::EulerUnstable { .. } => {
            OdemmseStatus::NumericalFailure
        }
    };
    LAST_ERROR.with(|slot| *slot.borrow_mut() = e.to_string());
    status
}

fn ok() -> OdemmseStatus {
    LAST_ERROR.with(|slot| slot.borrow_mut().clear());
    OdemmseStatus::Ok
}

fn channel_handle(matrix: ChannelMatrix) -> Result<*mut OdemmseChannel, Error> {
    let eig = gram_eigensystem(&matrix)?;
    Ok(Box::into_raw(Box::new(OdemmseChannel { matrix, eig })))
}

/// Message for the most recent failure on this thread; empty after a success.
/// The caller owns the returned string and must release it with
/// `odemmse_string_free`.
#[no_mangle]
pub extern "C" fn odemmse_last_error_message() -> *mut c_char {
    let message = LAST_ERROR.with(|slot| slot.borrow().clone());
    CString::new(message).map_or(std::ptr::null_mut(), CString::into_raw)
}

#[no_mangle]
pub extern "C" fn odemmse_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Draws an m x n channel with i.i.d. unit-variance circular Gaussian
/// entries, deterministically from the seed.
#[no_mangle]
pub extern "C" fn odemmse_channel_generate(
    n: usize,
    m: usize,
    seed: u64,
    out: *mut *mut OdemmseChannel,
) -> OdemmseStatus {
    if out.is_null() {
        return OdemmseStatus::NullPointer;
    }
    let cfg = match SystemConfig::new(n, m, 1.0, seed) {
        Ok(cfg) => cfg,
        Err(e) => return fail(e),
    };
    let matrix = sample_channel(&cfg, &mut rng_stream(seed, 0));
    match channel_handle(matrix) {
        Ok(handle) => {
            unsafe { *out = handle };
            ok()
        }
        Err(e) => fail(e),
    }
}

/// Parses the textual channel format ("m n" header, then row-major
/// "re im" pairs).
#[no_mangle]
pub extern "C" fn odemmse_channel_from_text(
    text: *const c_char,
    out: *mut *mut OdemmseChannel,
) -> OdemmseStatus {
    if text.is_null() || out.is_null() {
        return OdemmseStatus::NullPointer;
    }
    let text = match unsafe { CStr::from_ptr(text) }.to_str() {
        Ok(text) => text,
        Err(_) => return OdemmseStatus::ParseFailure,
    };
    let matrix = match ChannelMatrix::from_text(text) {
        Ok(matrix) => matrix,
        Err(e) => return fail(e),
    };
    match channel_handle(matrix) {
        Ok(handle) => {
            unsafe { *out = handle };
            ok()
        }
        Err(e) => fail(e),
    }
}

/// Round-trippable textual form of the channel; caller frees.
#[no_mangle]
pub extern "C" fn odemmse_channel_to_text(channel: *const OdemmseChannel) -> *mut c_char {
    let Some(channel) = (unsafe { channel.as_ref() }) else {
        return std::ptr::null_mut();
    };
    CString::new(channel.matrix.to_text()).map_or(std::ptr::null_mut(), CString::into_raw)
}

/// SHA-256 hex digest of the textual form; caller frees.
#[no_mangle]
pub extern "C" fn odemmse_channel_hash(channel: *const OdemmseChannel) -> *mut c_char {
    let Some(channel) = (unsafe { channel.as_ref() }) else {
        return std::ptr::null_mut();
    };
    CString::new(channel.matrix.content_hash()).map_or(std::ptr::null_mut(), CString::into_raw)
}

#[no_mangle]
pub extern "C" fn odemmse_channel_dims(
    channel: *const OdemmseChannel,
    rows: *mut usize,
    cols: *mut usize,
) -> OdemmseStatus {
    let Some(channel) = (unsafe { channel.as_ref() }) else {
        return OdemmseStatus::NullPointer;
    };
    if rows.is_null() || cols.is_null() {
        return OdemmseStatus::NullPointer;
    }
    unsafe {
        *rows = channel.matrix.rows();
        *cols = channel.matrix.cols();
    }
    ok()
}

#[no_mangle]
pub extern "C" fn odemmse_channel_free(channel: *mut OdemmseChannel) {
    if !channel.is_null() {
        drop(unsafe { Box::from_raw(channel) });
    }
}

/// Constant schedule eta(t) = eta.
#[no_mangle]
pub extern "C" fn odemmse_schedule_constant(
    eta: f64,
    out: *mut *mut OdemmseSchedule,
) -> OdemmseStatus {
    if out.is_null() {
        return OdemmseStatus::NullPointer;
    }
    match RegularizationSchedule::constant(eta) {
        Ok(inner) => {
            unsafe { *out = Box::into_raw(Box::new(OdemmseSchedule { inner })) };
            ok()
        }
        Err(e) => fail(e),
    }
}

/// Inverse-time schedule eta(t) = 1/(alpha t + epsilon) + sigma2.
#[no_mangle]
pub extern "C" fn odemmse_schedule_inverse_time(
    alpha: f64,
    epsilon: f64,
    sigma2: f64,
    out: *mut *mut OdemmseSchedule,
) -> OdemmseStatus {
    if out.is_null() {
        return OdemmseStatus::NullPointer;
    }
    match RegularizationSchedule::inverse_time(alpha, epsilon, sigma2) {
        Ok(inner) => {
            unsafe { *out = Box::into_raw(Box::new(OdemmseSchedule { inner })) };
            ok()
        }
        Err(e) => fail(e),
    }
}

#[no_mangle]
pub extern "C" fn odemmse_schedule_free(schedule: *mut OdemmseSchedule) {
    if !schedule.is_null() {
        drop(unsafe { Box::from_raw(schedule) });
    }
}

/// Exact constant-eta MSE at time t.
#[no_mangle]
pub extern "C" fn odemmse_analytical_mse(
    channel: *const OdemmseChannel,
    sigma2: f64,
    eta: f64,
    t: f64,
    out: *mut f64,
) -> OdemmseStatus {
    let Some(channel) = (unsafe { channel.as_ref() }) else {
        return OdemmseStatus::NullPointer;
    };
    if out.is_null() {
        return OdemmseStatus::NullPointer;
    }
    if !(sigma2 > 0.0) || !(eta > 0.0) || !(t >= 0.0) {
        return OdemmseStatus::InvalidArgument;
    }
    unsafe { *out = mse::analytical_mse(&channel.eig, sigma2, eta, t) };
    ok()
}

/// MSE of the one-shot MMSE estimator.
#[no_mangle]
pub extern "C" fn odemmse_mmse_mse(
    channel: *const OdemmseChannel,
    sigma2: f64,
    out: *mut f64,
) -> OdemmseStatus {
    let Some(channel) = (unsafe { channel.as_ref() }) else {
        return OdemmseStatus::NullPointer;
    };
    if out.is_null() {
        return OdemmseStatus::NullPointer;
    }
    if !(sigma2 > 0.0) {
        return OdemmseStatus::InvalidArgument;
    }
    unsafe { *out = mse::mmse_mse(&channel.eig, sigma2) };
    ok()
}

/// t -> infinity limit of the constant-eta MSE.
#[no_mangle]
pub extern "C" fn odemmse_asymptotic_mse(
    channel: *const OdemmseChannel,
    sigma2: f64,
    eta: f64,
    out: *mut f64,
) -> OdemmseStatus {
    let Some(channel) = (unsafe { channel.as_ref() }) else {
        return OdemmseStatus::NullPointer;
    };
    if out.is_null() {
        return OdemmseStatus::NullPointer;
    }
    if !(sigma2 > 0.0) || !(eta > 0.0) {
        return OdemmseStatus::InvalidArgument;
    }
    unsafe { *out = mse::asymptotic_mse(&channel.eig, sigma2, eta) };
    ok()
}

/// Exact MSE at time t under a time-dependent schedule.
#[no_mangle]
pub extern "C" fn odemmse_tode_mse(
    channel: *const OdemmseChannel,
    sigma2: f64,
    schedule: *const OdemmseSchedule,
    t: f64,
    quad_tol: f64,
    out: *mut f64,
) -> OdemmseStatus {
    let Some(channel) = (unsafe { channel.as_ref() }) else {
        return OdemmseStatus::NullPointer;
    };
    let Some(schedule) = (unsafe { schedule.as_ref() }) else {
        return OdemmseStatus::NullPointer;
    };
    if out.is_null() {
        return OdemmseStatus::NullPointer;
    }
    if !(sigma2 > 0.0) || !(t >= 0.0) || !(quad_tol > 0.0) {
        return OdemmseStatus::InvalidArgument;
    }
    match mse::tode_analytical_mse(&channel.eig, sigma2, &schedule.inner, t, quad_tol) {
        Ok(value) => {
            unsafe { *out = value };
            ok()
        }
        Err(e) => fail(e),
    }
}

/// Convergence functional F = integral of MSE over [0, horizon].
#[no_mangle]
pub extern "C" fn odemmse_convergence_functional(
    channel: *const OdemmseChannel,
    sigma2: f64,
    schedule: *const OdemmseSchedule,
    horizon: f64,
    dt: f64,
    quad_tol: f64,
    out: *mut f64,
) -> OdemmseStatus {
    let Some(channel) = (unsafe { channel.as_ref() }) else {
        return OdemmseStatus::NullPointer;
    };
    let Some(schedule) = (unsafe { schedule.as_ref() }) else {
        return OdemmseStatus::NullPointer;
    };
    if out.is_null() {
        return OdemmseStatus::NullPointer;
    }
    let engine = match &schedule.inner {
        RegularizationSchedule::Constant { eta } => mse::MseEngine::Constant { eta: *eta },
        other => mse::MseEngine::TimeDependent {
            schedule: other.clone(),
        },
    };
    match mse::convergence_functional(&engine, &channel.eig, sigma2, horizon, dt, quad_tol) {
        Ok(value) => {
            unsafe { *out = value };
            ok()
        }
        Err(e) => fail(e),
    }
}
