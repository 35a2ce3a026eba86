//! C ABI over `burgers-rg`.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free`. Every fallible call returns a [`BrgStatus`];
//! on failure the message is available from [`brg_last_error`] on the same
//! thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use burgers_rg::config::RunConfig;
use burgers_rg::rg::{estimate_exponents, run_rg, RunOutput};
use burgers_rg::spectral::SpectralField;
use burgers_rg::RgError;

/// Status codes. The nonzero groups mirror the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrgStatus {
    Ok = 0,
    /// Null pointer, bad length or invalid UTF-8.
    InvalidArgument = 1,
    InvalidInput = 2,
    Config = 3,
    /// Zero-mass / odd hypothesis or smallness condition violated.
    Hypothesis = 4,
    /// Truncation, analyticity or solver failure.
    Numerics = 5,
    Io = 6,
    Panic = 7,
}

impl From<&RgError> for BrgStatus {
    fn from(e: &RgError) -> Self {
        match e {
            RgError::InvalidInput(_) => BrgStatus::InvalidInput,
            RgError::Config(_) => BrgStatus::Config,
            RgError::Hypothesis { .. } | RgError::Smallness(_) => BrgStatus::Hypothesis,
            RgError::Truncation(_) | RgError::Analyticity(_) | RgError::Solver(_) => BrgStatus::Numerics,
            RgError::Io(_) | RgError::Csv(_) => BrgStatus::Io,
        }
    }
}

/// Parsed run configuration.
pub struct BrgConfig {
    inner: RunConfig,
}

/// Result of an RG run.
pub struct BrgRun {
    output: RunOutput,
    alpha: f64,
    beta: f64,
}

/// One row of the run history.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BrgRunRecord {
    pub n: usize,
    pub t: f64,
    pub a_n: f64,
    pub g_norm: f64,
    pub f_norm: f64,
    pub lambda_n: f64,
    pub mass: f64,
    pub parity_defect: f64,
    pub e_n: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: BrgStatus, msg: impl Into<String>) -> BrgStatus {
    set_error(msg.into());
    status
}

fn from_err(e: RgError) -> BrgStatus {
    let status = BrgStatus::from(&e);
    fail(status, format!("{}: {e}", e.category()))
}

fn guard(f: impl FnOnce() -> BrgStatus) -> BrgStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(BrgStatus::Panic, "panic inside burgers-rg"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, BrgStatus> {
    if p.is_null() {
        return Err(fail(BrgStatus::InvalidArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(BrgStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Message of the last failing call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn brg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn brg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parse a TOML configuration. Relative data paths resolve against the
/// current directory.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brg_config_from_toml(toml: *const c_char, out: *mut *mut BrgConfig) -> BrgStatus {
    guard(|| {
        if out.is_null() {
            return fail(BrgStatus::InvalidArgument, "out is null");
        }
        let text = match str_arg(toml, "toml") {
            Ok(s) => s,
            Err(s) => return s,
        };
        match RunConfig::from_toml_str(text).and_then(|c| c.rg_config().map(|_| c)) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(BrgConfig { inner }));
                BrgStatus::Ok
            }
            Err(e) => from_err(e),
        }
    })
}

/// Load a TOML configuration file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brg_config_load(path: *const c_char, out: *mut *mut BrgConfig) -> BrgStatus {
    guard(|| {
        if out.is_null() {
            return fail(BrgStatus::InvalidArgument, "out is null");
        }
        let p = match str_arg(path, "path") {
            Ok(s) => s,
            Err(s) => return s,
        };
        match RunConfig::load(Path::new(p)).and_then(|c| c.rg_config().map(|_| c)) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(BrgConfig { inner }));
                BrgStatus::Ok
            }
            Err(e) => from_err(e),
        }
    })
}

/// Number of grid points of the configuration, or 0 for a null handle.
///
/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn brg_config_num_points(config: *const BrgConfig) -> usize {
    config.as_ref().map_or(0, |c| c.inner.grid.num_points)
}

/// # Safety
/// `config` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn brg_config_free(config: *mut BrgConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

fn finish_run(output: RunOutput, l: f64) -> BrgRun {
    let exps = estimate_exponents(&output.scaled_snapshots(l)).ok();
    BrgRun {
        alpha: exps.map_or(f64::NAN, |e| e.alpha),
        beta: exps.map_or(f64::NAN, |e| e.beta),
        output,
    }
}

/// Run the RG iteration on the configuration's initial data.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brg_run(config: *const BrgConfig, out: *mut *mut BrgRun) -> BrgStatus {
    guard(|| {
        let (Some(cfg), false) = (config.as_ref(), out.is_null()) else {
            return fail(BrgStatus::InvalidArgument, "null config or out");
        };
        let res = cfg.inner.resolved().build().and_then(|r| {
            let l = r.rg.l;
            run_rg(&r.initial, &r.rg).map(|o| finish_run(o, l))
        });
        match res {
            Ok(run) => {
                *out = Box::into_raw(Box::new(run));
                BrgStatus::Ok
            }
            Err(e) => from_err(e),
        }
    })
}

/// Run the RG iteration on caller-supplied samples `f(x_j)`,
/// `x_j = (j - N/2)Δx`, replacing the configuration's initial data.
///
/// # Safety
/// `samples` must point to `len` doubles; `config` must be a live handle;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brg_run_samples(
    config: *const BrgConfig,
    samples: *const f64,
    len: usize,
    out: *mut *mut BrgRun,
) -> BrgStatus {
    guard(|| {
        let (Some(cfg), false, false) = (config.as_ref(), samples.is_null(), out.is_null()) else {
            return fail(BrgStatus::InvalidArgument, "null config, samples or out");
        };
        let data = std::slice::from_raw_parts(samples, len).to_vec();
        let cfg = cfg.inner.resolved();
        let res = cfg.grid_spec().and_then(|grid| {
            if len != grid.num_points() {
                return Err(RgError::InvalidInput(format!(
                    "expected {} samples, got {len}",
                    grid.num_points()
                )));
            }
            let rg = cfg.rg_config()?;
            let f0 = SpectralField::from_samples(grid, data, 1.0)?;
            run_rg(&f0, &rg).map(|o| finish_run(o, rg.l))
        });
        match res {
            Ok(run) => {
                *out = Box::into_raw(Box::new(run));
                BrgStatus::Ok
            }
            Err(e) => from_err(e),
        }
    })
}

/// Number of RG steps taken, or 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn brg_run_iterations(run: *const BrgRun) -> usize {
    run.as_ref().map_or(0, |r| r.output.steps.len())
}

/// Limiting prefactor `A`; NaN for a null handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn brg_run_a_limit(run: *const BrgRun) -> f64 {
    run.as_ref().map_or(f64::NAN, |r| r.output.a_limit)
}

/// `‖f_n - A f_1*‖_q` at the last step; NaN for a null handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn brg_run_final_residual(run: *const BrgRun) -> f64 {
    run.as_ref().map_or(f64::NAN, |r| r.output.final_residual)
}

/// Fitted decay and spread exponents; NaN when the fit was not possible.
///
/// # Safety
/// `run` must be a live handle; `alpha` and `beta` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brg_run_exponents(run: *const BrgRun, alpha: *mut f64, beta: *mut f64) -> BrgStatus {
    let (Some(r), false, false) = (run.as_ref(), alpha.is_null(), beta.is_null()) else {
        return fail(BrgStatus::InvalidArgument, "null run, alpha or beta");
    };
    *alpha = r.alpha;
    *beta = r.beta;
    BrgStatus::Ok
}

/// History row `n`, `0 ≤ n ≤ iterations`.
///
/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn brg_run_record(run: *const BrgRun, n: usize, out: *mut BrgRunRecord) -> BrgStatus {
    let (Some(r), false) = (run.as_ref(), out.is_null()) else {
        return fail(BrgStatus::InvalidArgument, "null run or out");
    };
    let Some(rec) = r.output.history.get(n) else {
        return fail(
            BrgStatus::InvalidArgument,
            format!("record {n} out of range (have {})", r.output.history.len()),
        );
    };
    *out = BrgRunRecord {
        n: rec.n,
        t: rec.t,
        a_n: rec.a_n,
        g_norm: rec.g_norm,
        f_norm: rec.f_norm,
        lambda_n: rec.lambda_n,
        mass: rec.mass,
        parity_defect: rec.parity_defect,
        e_n: rec.e_n,
    };
    BrgStatus::Ok
}

/// Copy the samples of the last renormalized field into `out[0..len]`;
/// `len` must equal the grid size.
///
/// # Safety
/// `run` must be a live handle; `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn brg_run_final_field(run: *const BrgRun, out: *mut f64, len: usize) -> BrgStatus {
    let (Some(r), false) = (run.as_ref(), out.is_null()) else {
        return fail(BrgStatus::InvalidArgument, "null run or out");
    };
    let last = r.output.fields.last().expect("a run keeps f_0");
    let s = last.samples();
    if s.len() != len {
        return fail(
            BrgStatus::InvalidArgument,
            format!("buffer holds {len} values, field has {}", s.len()),
        );
    }
    ptr::copy_nonoverlapping(s.as_ptr(), out, len);
    BrgStatus::Ok
}

/// # Safety
/// `run` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn brg_run_free(run: *mut BrgRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}
