//! Exercises the C surface exactly as a foreign caller would: through raw
//! pointers, status codes, and the string-ownership contract.

use std::ffi::{CStr, CString};
use std::ptr;

use odemmse_ffi::*;

fn make_channel(n: usize, m: usize, seed: u64) -> *mut OdemmseChannel {
    let mut handle = ptr::null_mut();
    assert_eq!(
        odemmse_channel_generate(n, m, seed, &mut handle),
        OdemmseStatus::Ok
    );
    assert!(!handle.is_null());
    handle
}

fn take_string(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    odemmse_string_free(s);
    out
}

#[test]
fn channel_generation_is_deterministic() {
    let a = make_channel(4, 6, 9);
    let b = make_channel(4, 6, 9);
    let c = make_channel(4, 6, 10);
    assert_eq!(take_string(odemmse_channel_hash(a)), take_string(odemmse_channel_hash(b)));
    assert_ne!(take_string(odemmse_channel_hash(a)), take_string(odemmse_channel_hash(c)));

    let (mut rows, mut cols) = (0usize, 0usize);
    assert_eq!(odemmse_channel_dims(a, &mut rows, &mut cols), OdemmseStatus::Ok);
    assert_eq!((rows, cols), (6, 4));

    odemmse_channel_free(a);
    odemmse_channel_free(b);
    odemmse_channel_free(c);
}

#[test]
fn text_round_trip_preserves_the_channel() {
    let a = make_channel(3, 5, 17);
    let text = take_string(odemmse_channel_to_text(a));
    let ctext = CString::new(text).unwrap();
    let mut b = ptr::null_mut();
    assert_eq!(odemmse_channel_from_text(ctext.as_ptr(), &mut b), OdemmseStatus::Ok);
    assert_eq!(take_string(odemmse_channel_hash(a)), take_string(odemmse_channel_hash(b)));
    odemmse_channel_free(a);
    odemmse_channel_free(b);
}

#[test]
fn mse_functions_agree_with_the_core_library() {
    let handle = make_channel(8, 8, 5);
    let sigma2 = 1.0;
    let eta = 0.5;

    let mut at_zero = 0.0;
    assert_eq!(
        odemmse_analytical_mse(handle, sigma2, eta, 0.0, &mut at_zero),
        OdemmseStatus::Ok
    );
    let mut late = 0.0;
    assert_eq!(
        odemmse_analytical_mse(handle, sigma2, eta, 50.0, &mut late),
        OdemmseStatus::Ok
    );
    let mut limit = 0.0;
    assert_eq!(
        odemmse_asymptotic_mse(handle, sigma2, eta, &mut limit),
        OdemmseStatus::Ok
    );
    assert!((late - limit).abs() < 1e-9);

    let mut mmse = 0.0;
    assert_eq!(odemmse_mmse_mse(handle, sigma2, &mut mmse), OdemmseStatus::Ok);
    assert!(limit >= mmse - 1e-12);

    // a constant schedule run through the time-dependent path must agree
    let mut schedule = ptr::null_mut();
    assert_eq!(odemmse_schedule_constant(eta, &mut schedule), OdemmseStatus::Ok);
    let mut tode = 0.0;
    assert_eq!(
        odemmse_tode_mse(handle, sigma2, schedule, 1.0, 1e-8, &mut tode),
        OdemmseStatus::Ok
    );
    let mut reference = 0.0;
    assert_eq!(
        odemmse_analytical_mse(handle, sigma2, eta, 1.0, &mut reference),
        OdemmseStatus::Ok
    );
    assert!((tode - reference).abs() < 1e-6);
    odemmse_schedule_free(schedule);

    let mut inverse = ptr::null_mut();
    assert_eq!(
        odemmse_schedule_inverse_time(10.0, 1e-8, sigma2, &mut inverse),
        OdemmseStatus::Ok
    );
    let mut functional = 0.0;
    assert_eq!(
        odemmse_convergence_functional(handle, sigma2, inverse, 0.8, 2e-3, 1e-8, &mut functional),
        OdemmseStatus::Ok
    );
    assert!(functional.is_finite() && functional > 0.0);
    odemmse_schedule_free(inverse);
    odemmse_channel_free(handle);
}

#[test]
fn status_codes_and_error_messages() {
    assert_eq!(
        odemmse_channel_generate(4, 4, 1, ptr::null_mut()),
        OdemmseStatus::NullPointer
    );

    let mut handle = ptr::null_mut();
    assert_eq!(
        odemmse_channel_generate(0, 4, 1, &mut handle),
        OdemmseStatus::InvalidArgument
    );
    let message = take_string(odemmse_last_error_message());
    assert!(!message.is_empty());

    let garbage = CString::new("not a channel").unwrap();
    assert_eq!(
        odemmse_channel_from_text(garbage.as_ptr(), &mut handle),
        OdemmseStatus::ParseFailure
    );

    let channel = make_channel(4, 4, 1);
    let mut out = 0.0;
    assert_eq!(
        odemmse_analytical_mse(channel, -1.0, 0.5, 1.0, &mut out),
        OdemmseStatus::InvalidArgument
    );
    // a successful call clears the thread-local message
    assert_eq!(
        odemmse_analytical_mse(channel, 1.0, 0.5, 1.0, &mut out),
        OdemmseStatus::Ok
    );
    assert!(take_string(odemmse_last_error_message()).is_empty());
    odemmse_channel_free(channel);

    // frees must tolerate null
    odemmse_channel_free(ptr::null_mut());
    odemmse_schedule_free(ptr::null_mut());
    odemmse_string_free(ptr::null_mut());
}

#[test]
fn generated_header_covers_the_surface() {
    let header = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/include/odemmse.h"
    ))
    .expect("header generated at build time");
    for symbol in [
        "odemmse_channel_generate",
        "odemmse_channel_from_text",
        "odemmse_channel_to_text",
        "odemmse_channel_hash",
        "odemmse_channel_dims",
        "odemmse_channel_free",
        "odemmse_schedule_constant",
        "odemmse_schedule_inverse_time",
        "odemmse_schedule_free",
        "odemmse_analytical_mse",
        "odemmse_mmse_mse",
        "odemmse_asymptotic_mse",
        "odemmse_tode_mse",
        "odemmse_convergence_functional",
        "odemmse_last_error_message",
        "odemmse_string_free",
        "OdemmseStatus",
        "OdemmseChannel",
        "OdemmseSchedule",
    ] {
        assert!(header.contains(symbol), "header lacks {symbol}");
    }
}
