//! C ABI for the single-photon entanglement simulator.
//!
//! Conventions:
//! * every fallible call returns [`SpeStatus`] and writes results through
//!   out-pointers, which are untouched on failure;
//! * `SpeConfig` and `SpeSweep` are opaque handles owned by the library;
//!   release them with the matching `*_free` call exactly once;
//! * after a non-`Ok` status, [`spe_last_error_message`] returns a
//!   thread-local human-readable description, valid until the next
//!   failing call on the same thread;
//! * strings returned through `char **` out-pointers are owned by the
//!   caller and must be released with [`spe_string_free`].

use spe_core::bell::run_chsh_sweep_repeated;
use spe_core::coherence::SpectralProfile;
use spe_core::config::{config_from_json, preset, ExperimentConfig};
use spe_core::rng::RngFactory;
use spe_core::SweepOutcome;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status code of every fallible API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was malformed (bad UTF-8, out-of-range value, index).
    InvalidArgument = 2,
    /// The configuration could not be parsed or resolved.
    ConfigError = 3,
    /// The simulation or an internal step failed.
    RuntimeError = 4,
}

/// Opaque experiment configuration handle.
pub struct SpeConfig {
    inner: ExperimentConfig,
}

/// Opaque result handle of a Monte Carlo sweep.
pub struct SpeSweep {
    outcome: SweepOutcome,
}

/// One sweep grid point in C layout. `counts` holds the four channel
/// counts of each of the four CHSH settings, setting-major
/// (`counts[4*setting + channel]`, channels ordered 0V, 0H, 1V, 1H).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SpeSweepPoint {
    pub alpha: f64,
    pub theta: f64,
    pub s: f64,
    pub s_err: f64,
    pub correlations: [f64; 4],
    pub correlation_errors: [f64; 4],
    pub counts: [u64; 16],
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: SpeStatus, message: impl std::fmt::Display) -> SpeStatus {
    let text = message.to_string().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(text).unwrap_or_default();
    });
    status
}

/// Runs a closure behind a panic guard so unwinding never crosses the FFI
/// boundary.
fn guarded(f: impl FnOnce() -> SpeStatus) -> SpeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(SpeStatus::RuntimeError, "internal panic"),
    }
}

/// # Safety
/// `ptr` must be a valid, NUL-terminated C string.
unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, SpeStatus> {
    if ptr.is_null() {
        return Err(fail(SpeStatus::NullPointer, "string argument is null"));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|e| fail(SpeStatus::InvalidArgument, format!("invalid UTF-8: {e}")))
}

/// Version of the library as a static NUL-terminated string; do not free.
#[no_mangle]
pub extern "C" fn spe_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the last failure on this thread (empty string if none).
/// The pointer stays valid until the next failing call on this thread; do
/// not free.
#[no_mangle]
pub extern "C" fn spe_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Releases a string previously returned through a `char **` out-pointer.
///
/// # Safety
/// `s` must be a pointer obtained from this library's `char **`
/// out-parameters (or null, which is a no-op), passed at most once.
#[no_mangle]
pub unsafe extern "C" fn spe_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Closed-form CHSH S for Bloch angle `alpha`, decoherence `epsilon` and
/// state quality `eta`.
///
/// # Safety
/// `out_s` must be a valid pointer to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn spe_theory_s(
    alpha: f64,
    epsilon: f64,
    eta: f64,
    out_s: *mut f64,
) -> SpeStatus {
    guarded(|| {
        if out_s.is_null() {
            return fail(SpeStatus::NullPointer, "out_s is null");
        }
        match spe_core::theory_s(alpha, epsilon, eta) {
            Ok(s) => {
                *out_s = s;
                SpeStatus::Ok
            }
            Err(e) => fail(SpeStatus::InvalidArgument, e),
        }
    })
}

/// Decoherence parameter ε for a Gaussian spectrum (`omega0`,
/// `sigma_omega` in rad/s) after a time delay `delay` (s).
///
/// # Safety
/// `out_epsilon` must be a valid pointer to writable memory for one
/// `double`.
#[no_mangle]
pub unsafe extern "C" fn spe_epsilon_from_delay(
    omega0: f64,
    sigma_omega: f64,
    delay: f64,
    out_epsilon: *mut f64,
) -> SpeStatus {
    guarded(|| {
        if out_epsilon.is_null() {
            return fail(SpeStatus::NullPointer, "out_epsilon is null");
        }
        match SpectralProfile::new(omega0, sigma_omega) {
            Ok(profile) => {
                let eps = profile.epsilon_from_delay(delay);
                if !eps.is_finite() {
                    return fail(SpeStatus::InvalidArgument, "delay produced non-finite ε");
                }
                *out_epsilon = eps;
                SpeStatus::Ok
            }
            Err(e) => fail(SpeStatus::InvalidArgument, e),
        }
    })
}

/// Coherence time (s) and length (m) of a Gaussian spectrum.
///
/// # Safety
/// `out_tau_c` and `out_l_c` must be valid pointers to writable memory
/// for one `double` each.
#[no_mangle]
pub unsafe extern "C" fn spe_coherence_scales(
    omega0: f64,
    sigma_omega: f64,
    out_tau_c: *mut f64,
    out_l_c: *mut f64,
) -> SpeStatus {
    guarded(|| {
        if out_tau_c.is_null() || out_l_c.is_null() {
            return fail(SpeStatus::NullPointer, "output pointer is null");
        }
        match SpectralProfile::new(omega0, sigma_omega) {
            Ok(profile) => {
                *out_tau_c = profile.coherence_time();
                *out_l_c = profile.coherence_length();
                SpeStatus::Ok
            }
            Err(e) => fail(SpeStatus::InvalidArgument, e),
        }
    })
}

/// Parses a JSON experiment config (optionally referencing a `"preset"`)
/// into a new handle.
///
/// # Safety
/// `json` must be a valid NUL-terminated C string and `out_config` a
/// valid pointer to an `SpeConfig *` slot.
#[no_mangle]
pub unsafe extern "C" fn spe_config_from_json(
    json: *const c_char,
    out_config: *mut *mut SpeConfig,
) -> SpeStatus {
    guarded(|| {
        if out_config.is_null() {
            return fail(SpeStatus::NullPointer, "out_config is null");
        }
        let text = match read_str(json) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match config_from_json(text) {
            Ok(inner) => {
                *out_config = Box::into_raw(Box::new(SpeConfig { inner }));
                SpeStatus::Ok
            }
            Err(e) => fail(SpeStatus::ConfigError, e),
        }
    })
}

/// Builds a config handle from a built-in preset name (laser, led,
/// halogen, incoherent, broadband_led).
///
/// # Safety
/// `name` must be a valid NUL-terminated C string and `out_config` a
/// valid pointer to an `SpeConfig *` slot.
#[no_mangle]
pub unsafe extern "C" fn spe_config_from_preset(
    name: *const c_char,
    out_config: *mut *mut SpeConfig,
) -> SpeStatus {
    guarded(|| {
        if out_config.is_null() {
            return fail(SpeStatus::NullPointer, "out_config is null");
        }
        let name = match read_str(name) {
            Ok(n) => n,
            Err(status) => return status,
        };
        match preset(name) {
            Ok(inner) => {
                *out_config = Box::into_raw(Box::new(SpeConfig { inner }));
                SpeStatus::Ok
            }
            Err(e) => fail(SpeStatus::ConfigError, e),
        }
    })
}

/// Sets the simulation seed on a config handle.
///
/// # Safety
/// `config` must be a live handle from `spe_config_from_json` or
/// `spe_config_from_preset`.
#[no_mangle]
pub unsafe extern "C" fn spe_config_set_seed(config: *mut SpeConfig, seed: u64) -> SpeStatus {
    guarded(|| {
        let Some(cfg) = config.as_mut() else {
            return fail(SpeStatus::NullPointer, "config is null");
        };
        cfg.inner.seed = Some(seed);
        SpeStatus::Ok
    })
}

/// Releases a config handle (null is a no-op).
///
/// # Safety
/// `config` must be a live handle (or null), passed at most once.
#[no_mangle]
pub unsafe extern "C" fn spe_config_free(config: *mut SpeConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs the configured Monte Carlo CHSH sweep. The config must carry a
/// seed (`"seed"` in JSON or [`spe_config_set_seed`]).
///
/// # Safety
/// `config` must be a live handle and `out_sweep` a valid pointer to an
/// `SpeSweep *` slot.
#[no_mangle]
pub unsafe extern "C" fn spe_sweep_run(
    config: *const SpeConfig,
    out_sweep: *mut *mut SpeSweep,
) -> SpeStatus {
    guarded(|| {
        if out_sweep.is_null() {
            return fail(SpeStatus::NullPointer, "out_sweep is null");
        }
        let Some(cfg) = config.as_ref() else {
            return fail(SpeStatus::NullPointer, "config is null");
        };
        let resolved = match cfg.inner.resolve() {
            Ok(r) => r,
            Err(e) => return fail(SpeStatus::ConfigError, e),
        };
        let Some(seed) = resolved.seed else {
            return fail(
                SpeStatus::ConfigError,
                "sweep needs a seed: set \"seed\" or call spe_config_set_seed",
            );
        };
        let outcome = run_chsh_sweep_repeated(
            &resolved.alphas,
            &resolved.model,
            resolved.estimator,
            &resolved.source,
            &resolved.detector,
            &RngFactory::new(seed),
            resolved.repeats,
        );
        match outcome {
            Ok(outcome) => {
                *out_sweep = Box::into_raw(Box::new(SpeSweep { outcome }));
                SpeStatus::Ok
            }
            Err(e) => fail(SpeStatus::RuntimeError, e),
        }
    })
}

/// Number of grid points in a sweep result.
///
/// # Safety
/// `sweep` must be a live handle and `out_len` a valid pointer to
/// writable memory for one `uintptr_t`.
#[no_mangle]
pub unsafe extern "C" fn spe_sweep_len(sweep: *const SpeSweep, out_len: *mut usize) -> SpeStatus {
    guarded(|| {
        if out_len.is_null() {
            return fail(SpeStatus::NullPointer, "out_len is null");
        }
        let Some(s) = sweep.as_ref() else {
            return fail(SpeStatus::NullPointer, "sweep is null");
        };
        *out_len = s.outcome.points.len();
        SpeStatus::Ok
    })
}

/// Copies grid point `index` into `out_point`.
///
/// # Safety
/// `sweep` must be a live handle and `out_point` a valid pointer to
/// writable memory for one `SpeSweepPoint`.
#[no_mangle]
pub unsafe extern "C" fn spe_sweep_point(
    sweep: *const SpeSweep,
    index: usize,
    out_point: *mut SpeSweepPoint,
) -> SpeStatus {
    guarded(|| {
        if out_point.is_null() {
            return fail(SpeStatus::NullPointer, "out_point is null");
        }
        let Some(s) = sweep.as_ref() else {
            return fail(SpeStatus::NullPointer, "sweep is null");
        };
        let Some(p) = s.outcome.points.get(index) else {
            return fail(
                SpeStatus::InvalidArgument,
                format!("index {index} out of range ({} points)", s.outcome.points.len()),
            );
        };
        let mut counts = [0u64; 16];
        for (j, c) in p.counts.iter().enumerate() {
            counts[4 * j..4 * (j + 1)].copy_from_slice(&c.as_array());
        }
        *out_point = SpeSweepPoint {
            alpha: p.alpha,
            theta: p.theta,
            s: p.s,
            s_err: p.s_err,
            correlations: p.correlations,
            correlation_errors: p.correlation_errors,
            counts,
        };
        SpeStatus::Ok
    })
}

/// Serializes a sweep result as pretty JSON into a caller-owned string
/// (release with [`spe_string_free`]).
///
/// # Safety
/// `sweep` must be a live handle and `out_json` a valid pointer to a
/// `char *` slot.
#[no_mangle]
pub unsafe extern "C" fn spe_sweep_to_json(
    sweep: *const SpeSweep,
    out_json: *mut *mut c_char,
) -> SpeStatus {
    guarded(|| {
        if out_json.is_null() {
            return fail(SpeStatus::NullPointer, "out_json is null");
        }
        let Some(s) = sweep.as_ref() else {
            return fail(SpeStatus::NullPointer, "sweep is null");
        };
        let text = spe_core::report::render_sweep_json(&s.outcome);
        match CString::new(text) {
            Ok(c) => {
                *out_json = c.into_raw();
                SpeStatus::Ok
            }
            Err(e) => fail(SpeStatus::RuntimeError, e),
        }
    })
}

/// Releases a sweep handle (null is a no-op).
///
/// # Safety
/// `sweep` must be a live handle (or null), passed at most once.
#[no_mangle]
pub unsafe extern "C" fn spe_sweep_free(sweep: *mut SpeSweep) {
    if !sweep.is_null() {
        drop(Box::from_raw(sweep));
    }
}
