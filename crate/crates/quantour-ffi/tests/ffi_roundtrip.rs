//! Exercises the C ABI end to end from Rust: handle lifecycle, error codes,
//! JSON round-trips, region extraction, and header generation.

use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::ptr;

use quantour_ffi::*;

fn fixture_path() -> CString {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../quantour/tests/fixtures/observations_small.csv");
    CString::new(p.to_str().unwrap()).unwrap()
}

fn tiny_options(seed: u64) -> qt_fit_options {
    let mut opts = qt_fit_options_default();
    opts.directions = 6;
    opts.burn_in = 150;
    opts.iterations = 600;
    opts.thin = 10;
    opts.seed = seed;
    opts
}

fn load_observations() -> *mut qt_observations {
    let mut obs: *mut qt_observations = ptr::null_mut();
    let status = unsafe { qt_observations_read_csv(fixture_path().as_ptr(), &mut obs) };
    assert_eq!(status, qt_status::QT_OK);
    assert!(!obs.is_null());
    obs
}

#[test]
fn observation_table_loads_and_reports_length() {
    let obs = load_observations();
    assert_eq!(unsafe { qt_observations_len(obs) }, 144);
    unsafe { qt_observations_free(obs) };
    assert_eq!(unsafe { qt_observations_len(ptr::null()) }, 0);
}

#[test]
fn fit_region_and_json_roundtrip() {
    let obs = load_observations();
    let opts = tiny_options(42);
    let mut fit: *mut qt_model_fit = ptr::null_mut();
    let status = unsafe { qt_fit(obs, &opts, &mut fit) };
    assert_eq!(status, qt_status::QT_OK);

    let profile = qt_profile {
        player: qt_player::QT_PLAYER_NADAL,
        win: false,
        surface: qt_surface::QT_SURFACE_CLAY,
        tournament: qt_tournament::QT_TOURNAMENT_OTHERS,
        top20: false,
    };
    let mut vertices: *mut f64 = ptr::null_mut();
    let mut len: usize = 0;
    let status = unsafe { qt_quantile_region(fit, &profile, true, &mut vertices, &mut len) };
    assert_eq!(status, qt_status::QT_OK);
    assert!(len >= 6 && len.is_multiple_of(2), "vertex buffer length {len}");
    let flat = unsafe { std::slice::from_raw_parts(vertices, len) };
    assert!(flat.iter().all(|v| v.is_finite()));
    // Original units: rel_points coordinates near 1, minutes near 100.
    let xs: Vec<f64> = flat.iter().step_by(2).copied().collect();
    let ys: Vec<f64> = flat.iter().skip(1).step_by(2).copied().collect();
    assert!(xs.iter().all(|x| (0.3..3.0).contains(x)), "{xs:?}");
    assert!(ys.iter().all(|y| (20.0..400.0).contains(y)), "{ys:?}");
    unsafe { qt_vertices_free(vertices, len) };

    // Standardized units differ from original units.
    let mut std_vertices: *mut f64 = ptr::null_mut();
    let mut std_len: usize = 0;
    let status =
        unsafe { qt_quantile_region(fit, &profile, false, &mut std_vertices, &mut std_len) };
    assert_eq!(status, qt_status::QT_OK);
    assert_eq!(std_len, len);
    let std_flat = unsafe { std::slice::from_raw_parts(std_vertices, std_len) };
    assert!(std_flat.iter().skip(1).step_by(2).all(|y| y.abs() < 10.0));
    unsafe { qt_vertices_free(std_vertices, std_len) };

    // JSON round-trip through C strings preserves the region exactly.
    let mut json: *mut std::ffi::c_char = ptr::null_mut();
    assert_eq!(unsafe { qt_fit_to_json(fit, &mut json) }, qt_status::QT_OK);
    let json_str = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    assert!(json_str.contains("\"design_columns\""));

    let mut fit2: *mut qt_model_fit = ptr::null_mut();
    let c_json = CString::new(json_str).unwrap();
    assert_eq!(unsafe { qt_fit_from_json(c_json.as_ptr(), &mut fit2) }, qt_status::QT_OK);
    let mut v2: *mut f64 = ptr::null_mut();
    let mut l2: usize = 0;
    assert_eq!(
        unsafe { qt_quantile_region(fit2, &profile, true, &mut v2, &mut l2) },
        qt_status::QT_OK
    );
    assert_eq!(l2, len);
    let flat2 = unsafe { std::slice::from_raw_parts(v2, l2) };
    assert_eq!(flat, flat2, "region changed across JSON round-trip");

    unsafe {
        qt_vertices_free(v2, l2);
        qt_string_free(json);
        qt_fit_free(fit2);
        qt_fit_free(fit);
        qt_observations_free(obs);
    }
}

#[test]
fn same_seed_gives_identical_json() {
    let obs = load_observations();
    let json_of = |seed: u64| {
        let opts = tiny_options(seed);
        let mut fit: *mut qt_model_fit = ptr::null_mut();
        assert_eq!(unsafe { qt_fit(obs, &opts, &mut fit) }, qt_status::QT_OK);
        let mut json: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(unsafe { qt_fit_to_json(fit, &mut json) }, qt_status::QT_OK);
        let s = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
        unsafe {
            qt_string_free(json);
            qt_fit_free(fit);
        }
        s
    };
    assert_eq!(json_of(7), json_of(7));
    assert_ne!(json_of(7), json_of(8));
    unsafe { qt_observations_free(obs) };
}

#[test]
fn error_paths_set_status_and_message() {
    // Null pointers.
    let status = unsafe { qt_observations_read_csv(ptr::null(), ptr::null_mut()) };
    assert_eq!(status, qt_status::QT_NULL_POINTER);

    // Missing file.
    let mut obs: *mut qt_observations = ptr::null_mut();
    let bad = CString::new("/no/such/file.csv").unwrap();
    let status = unsafe { qt_observations_read_csv(bad.as_ptr(), &mut obs) };
    assert_eq!(status, qt_status::QT_IO_ERROR);
    let msg = unsafe { CStr::from_ptr(qt_last_error()) }.to_str().unwrap();
    assert!(msg.contains("file.csv"), "{msg}");

    // Invalid tau.
    let real = load_observations();
    let mut opts = tiny_options(1);
    opts.tau = 1.5;
    let mut fit: *mut qt_model_fit = ptr::null_mut();
    let status = unsafe { qt_fit(real, &opts, &mut fit) };
    assert_eq!(status, qt_status::QT_FIT_ERROR); // direction error wrapping the tau error
    let msg = unsafe { CStr::from_ptr(qt_last_error()) }.to_str().unwrap();
    assert!(msg.contains("tau"), "{msg}");

    // Garbage JSON.
    let junk = CString::new("{not json").unwrap();
    let status = unsafe { qt_fit_from_json(junk.as_ptr(), &mut fit) };
    assert_eq!(status, qt_status::QT_PARSE_ERROR);

    unsafe { qt_observations_free(real) };
}

#[test]
fn version_and_header_exist() {
    let v = unsafe { CStr::from_ptr(qt_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));

    let header = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/quantour.h");
    let text = std::fs::read_to_string(header).expect("generated header");
    for symbol in [
        "qt_observations_read_csv",
        "qt_fit_options_default",
        "qt_fit(",
        "qt_quantile_region",
        "qt_last_error",
        "typedef struct qt_model_fit qt_model_fit;",
        "QT_OK",
    ] {
        assert!(text.contains(symbol), "header is missing {symbol}");
    }
}
