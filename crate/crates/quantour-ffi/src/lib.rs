//! C ABI for the quantour library: load observation tables, run directional
//! quantile fits, and extract quantile-region polygons from other languages.
//!
//! Conventions: every fallible call returns a [`qt_status`]; on failure a
//! thread-local message is retrievable with [`qt_last_error`]. Handles are
//! opaque and freed with their matching `qt_*_free` function. The header is
//! generated into `include/quantour.h` at build time.

#![allow(non_camel_case_types)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use quantour::design::{self, CovariateProfile};
use quantour::engine::{self, sha256_hex, ModelFit};
use quantour::ingest::{self, Observation, Player, Surface, Tournament};
use quantour::sampler::SamplerConfig;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum qt_status {
    QT_OK = 0,
    QT_NULL_POINTER = 1,
    QT_INVALID_UTF8 = 2,
    QT_IO_ERROR = 3,
    QT_PARSE_ERROR = 4,
    QT_INVALID_ARGUMENT = 5,
    QT_FIT_ERROR = 6,
    QT_PANIC = 7,
}

use qt_status::*;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &quantour::Error) -> qt_status {
    use quantour::Error as E;
    match err {
        E::Io { .. } | E::NoInputFiles(_) => QT_IO_ERROR,
        E::Csv { .. } | E::HeaderMismatch { .. } | E::Json(_) => QT_PARSE_ERROR,
        E::Parameter(_) | E::Config(_) | E::Usage(_) => QT_INVALID_ARGUMENT,
        _ => QT_FIT_ERROR,
    }
}

fn guarded(body: impl FnOnce() -> qt_status) -> qt_status {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            QT_PANIC
        }
    }
}

/// An owned observation table (opaque).
pub struct qt_observations {
    rows: Vec<Observation>,
}

/// A completed directional fit (opaque).
pub struct qt_model_fit {
    fit: ModelFit,
}

/// Chain and model settings for [`qt_fit`]; obtain defaults with
/// [`qt_fit_options_default`] and override fields as needed.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct qt_fit_options {
    /// Quantile magnitude in (0,1).
    pub tau: f64,
    /// Number of grid directions (>= 3).
    pub directions: u64,
    pub burn_in: u64,
    /// Post-burn-in iterations.
    pub iterations: u64,
    /// Keep every n-th draw; must divide `iterations`.
    pub thin: u64,
    pub prior_var: f64,
    pub sigma_shape: f64,
    pub sigma_scale: f64,
    pub seed: u64,
    /// Parallel workers; 0 means all cores.
    pub jobs: u64,
}

#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum qt_player {
    QT_PLAYER_FEDERER = 0,
    QT_PLAYER_DJOKOVIC = 1,
    QT_PLAYER_NADAL = 2,
}

#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum qt_surface {
    QT_SURFACE_HARD = 0,
    QT_SURFACE_CLAY = 1,
    QT_SURFACE_GRASS = 2,
}

#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum qt_tournament {
    QT_TOURNAMENT_OTHERS = 0,
    QT_TOURNAMENT_GRAND_SLAM = 1,
    QT_TOURNAMENT_FINALS = 2,
    QT_TOURNAMENT_MASTERS = 3,
}

/// A covariate combination; reference values are Federer / loss / hard /
/// others / not top-20.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct qt_profile {
    pub player: qt_player,
    pub win: bool,
    pub surface: qt_surface,
    pub tournament: qt_tournament,
    pub top20: bool,
}

impl From<qt_profile> for CovariateProfile {
    fn from(p: qt_profile) -> Self {
        CovariateProfile {
            player: match p.player {
                qt_player::QT_PLAYER_FEDERER => Player::Federer,
                qt_player::QT_PLAYER_DJOKOVIC => Player::Djokovic,
                qt_player::QT_PLAYER_NADAL => Player::Nadal,
            },
            win: p.win,
            surface: match p.surface {
                qt_surface::QT_SURFACE_HARD => Surface::Hard,
                qt_surface::QT_SURFACE_CLAY => Surface::Clay,
                qt_surface::QT_SURFACE_GRASS => Surface::Grass,
            },
            tournament: match p.tournament {
                qt_tournament::QT_TOURNAMENT_OTHERS => Tournament::Others,
                qt_tournament::QT_TOURNAMENT_GRAND_SLAM => Tournament::GrandSlam,
                qt_tournament::QT_TOURNAMENT_FINALS => Tournament::Finals,
                qt_tournament::QT_TOURNAMENT_MASTERS => Tournament::Masters,
            },
            top20: p.top20,
        }
    }
}

/// Library version string; static storage, do not free.
#[no_mangle]
pub extern "C" fn qt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the last failure on this thread; valid until the next failing
/// call on the same thread. Never null.
#[no_mangle]
pub extern "C" fn qt_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Default fit options: tau 0.25, 180 directions, burn-in 10000, 100000
/// iterations thinned by 100, N(0, 100) coefficient prior, IG(0.01, 0.01)
/// scale prior.
#[no_mangle]
pub extern "C" fn qt_fit_options_default() -> qt_fit_options {
    let s = SamplerConfig::default();
    qt_fit_options {
        tau: 0.25,
        directions: 180,
        burn_in: s.burn_in as u64,
        iterations: s.total_iters as u64,
        thin: s.thin as u64,
        prior_var: s.prior_var,
        sigma_shape: s.sigma_shape,
        sigma_scale: s.sigma_scale,
        seed: s.seed,
        jobs: 0,
    }
}

unsafe fn cstr_arg<'a>(ptr: *const c_char) -> Result<&'a str, qt_status> {
    if ptr.is_null() {
        set_error("null pointer argument");
        return Err(QT_NULL_POINTER);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        QT_INVALID_UTF8
    })
}

/// Reads an observation table (CSV as written by `quantour ingest`).
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid destination; on
/// QT_OK the handle must be released with [`qt_observations_free`].
#[no_mangle]
pub unsafe extern "C" fn qt_observations_read_csv(
    path: *const c_char,
    out: *mut *mut qt_observations,
) -> qt_status {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer");
            return QT_NULL_POINTER;
        }
        let path = match cstr_arg(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match ingest::read_observations_csv(Path::new(path)) {
            Ok(rows) => {
                *out = Box::into_raw(Box::new(qt_observations { rows }));
                QT_OK
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Number of observations in the table; 0 for a null handle.
///
/// # Safety
/// `obs` must be null or a live handle from [`qt_observations_read_csv`].
#[no_mangle]
pub unsafe extern "C" fn qt_observations_len(obs: *const qt_observations) -> usize {
    if obs.is_null() {
        return 0;
    }
    (*obs).rows.len()
}

/// # Safety
/// `obs` must be a handle from [`qt_observations_read_csv`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qt_observations_free(obs: *mut qt_observations) {
    if !obs.is_null() {
        drop(Box::from_raw(obs));
    }
}

/// Fits the directional quantile regression on an observation table.
///
/// # Safety
/// `obs` must be a live observations handle; `options` and `out` must be
/// valid; on QT_OK release the fit with [`qt_fit_free`].
#[no_mangle]
pub unsafe extern "C" fn qt_fit(
    obs: *const qt_observations,
    options: *const qt_fit_options,
    out: *mut *mut qt_model_fit,
) -> qt_status {
    guarded(|| {
        if obs.is_null() || options.is_null() || out.is_null() {
            set_error("null pointer argument");
            return QT_NULL_POINTER;
        }
        let rows = &(*obs).rows;
        let opts = *options;
        let cfg = SamplerConfig {
            burn_in: opts.burn_in as usize,
            total_iters: opts.iterations as usize,
            thin: opts.thin as usize,
            prior_var: opts.prior_var,
            sigma_shape: opts.sigma_shape,
            sigma_scale: opts.sigma_scale,
            seed: opts.seed,
        };
        let jobs = if opts.jobs == 0 { None } else { Some(opts.jobs as usize) };

        let run = || -> quantour::Result<ModelFit> {
            let x = design::encode_design(rows)?;
            let y = design::response_matrix(rows);
            let (z, scaling) = design::standardize(&y)?;
            let fingerprint = sha256_hex(serde_json::to_string(rows)?.as_bytes());
            engine::fit_all_directions(
                &z,
                &x,
                opts.tau,
                &cfg,
                opts.directions as usize,
                jobs,
                scaling,
                fingerprint,
            )
        };
        match run() {
            Ok(fit) => {
                *out = Box::into_raw(Box::new(qt_model_fit { fit }));
                QT_OK
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Serializes a fit to JSON; free the string with [`qt_string_free`].
///
/// # Safety
/// `fit` must be a live fit handle and `json_out` a valid destination.
#[no_mangle]
pub unsafe extern "C" fn qt_fit_to_json(
    fit: *const qt_model_fit,
    json_out: *mut *mut c_char,
) -> qt_status {
    guarded(|| {
        if fit.is_null() || json_out.is_null() {
            set_error("null pointer argument");
            return QT_NULL_POINTER;
        }
        match (*fit).fit.to_json() {
            Ok(json) => match CString::new(json) {
                Ok(c) => {
                    *json_out = c.into_raw();
                    QT_OK
                }
                Err(_) => {
                    set_error("serialized fit contained an interior NUL");
                    QT_PARSE_ERROR
                }
            },
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Restores a fit from JSON produced by [`qt_fit_to_json`] or the CLI.
///
/// # Safety
/// `json` must be NUL-terminated; on QT_OK free the handle with
/// [`qt_fit_free`].
#[no_mangle]
pub unsafe extern "C" fn qt_fit_from_json(
    json: *const c_char,
    out: *mut *mut qt_model_fit,
) -> qt_status {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer");
            return QT_NULL_POINTER;
        }
        let json = match cstr_arg(json) {
            Ok(j) => j,
            Err(s) => return s,
        };
        match ModelFit::from_json(json) {
            Ok(fit) => {
                *out = Box::into_raw(Box::new(qt_model_fit { fit }));
                QT_OK
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// # Safety
/// `fit` must be a handle from [`qt_fit`] or [`qt_fit_from_json`].
#[no_mangle]
pub unsafe extern "C" fn qt_fit_free(fit: *mut qt_model_fit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Computes the quantile-region polygon for a covariate profile.
///
/// Writes an interleaved vertex buffer `x0, y0, x1, y1, …` (counterclockwise)
/// and its length in doubles. An empty region yields a null buffer and
/// length 0 with QT_OK. Free the buffer with [`qt_vertices_free`].
///
/// # Safety
/// All pointers must be valid; `fit` must be a live fit handle.
#[no_mangle]
pub unsafe extern "C" fn qt_quantile_region(
    fit: *const qt_model_fit,
    profile: *const qt_profile,
    original_units: bool,
    vertices_out: *mut *mut f64,
    len_out: *mut usize,
) -> qt_status {
    guarded(|| {
        if fit.is_null() || profile.is_null() || vertices_out.is_null() || len_out.is_null() {
            set_error("null pointer argument");
            return QT_NULL_POINTER;
        }
        let profile = CovariateProfile::from(*profile);
        match engine::quantile_region(&(*fit).fit, &profile) {
            Ok((std_poly, orig_poly)) => {
                let poly = if original_units { orig_poly } else { std_poly };
                let mut flat: Vec<f64> = Vec::with_capacity(poly.vertices().len() * 2);
                for v in poly.vertices() {
                    flat.push(v[0]);
                    flat.push(v[1]);
                }
                *len_out = flat.len();
                if flat.is_empty() {
                    *vertices_out = std::ptr::null_mut();
                } else {
                    let mut boxed = flat.into_boxed_slice();
                    *vertices_out = boxed.as_mut_ptr();
                    std::mem::forget(boxed);
                }
                QT_OK
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// # Safety
/// `vertices`/`len` must come from [`qt_quantile_region`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qt_vertices_free(vertices: *mut f64, len: usize) {
    if !vertices.is_null() {
        drop(Box::from_raw(std::ptr::slice_from_raw_parts_mut(vertices, len)));
    }
}

/// # Safety
/// `s` must be a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
