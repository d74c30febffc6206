//! C ABI over `curvelab`.
//!
//! Objects cross the boundary as opaque handles that must be released with
//! their `_free` function. Fallible calls return a [`CurvelabStatus`] and
//! write results through out-pointers; the message of the most recent error
//! on the calling thread is available from [`curvelab_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use curvelab::error::Error;
use curvelab::poly::{CurveSpec, PolyCurve};
use curvelab::report::{self, corpus, Command, RunConfig, Status, VerificationReport};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurvelabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Invalid configuration, unknown command or unknown name.
    Config = 3,
    /// A module operation failed.
    Module = 4,
    Panic = 5,
}

/// Overall status of a report.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurvelabCheckStatus {
    Pass = 0,
    Warn = 1,
    Fail = 2,
}

/// Opaque curve handle.
pub struct CurvelabCurve(PolyCurve);

/// Opaque report handle.
pub struct CurvelabReport(VerificationReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

fn fail(status: CurvelabStatus, msg: impl Into<String>) -> CurvelabStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> CurvelabStatus {
    let status = match e {
        Error::Config { .. } | Error::InvalidArgument(_) => CurvelabStatus::Config,
        _ => CurvelabStatus::Module,
    };
    fail(status, e.to_string())
}

fn guarded(f: impl FnOnce() -> CurvelabStatus) -> CurvelabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(CurvelabStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, CurvelabStatus> {
    if p.is_null() {
        return Err(fail(CurvelabStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(CurvelabStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Message of the last failed call on this thread, or null. Owned by the
/// library; valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn curvelab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version string; static.
#[no_mangle]
pub extern "C" fn curvelab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Looks up a corpus curve (`moment-3`, `cusp`, `random-<seed>`, ...).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn curvelab_curve_from_corpus(name: *const c_char, out: *mut *mut CurvelabCurve) -> CurvelabStatus {
    guarded(|| {
        if out.is_null() {
            return fail(CurvelabStatus::NullPointer, "out is null");
        }
        let name = match read_str(name, "name") {
            Ok(s) => s,
            Err(s) => return s,
        };
        match corpus::lookup(name) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(CurvelabCurve(c)));
                CurvelabStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Parses a curve spec (`dim = ...`, `coeffs = [["p/q", ...], ...]`).
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn curvelab_curve_from_toml(text: *const c_char, out: *mut *mut CurvelabCurve) -> CurvelabStatus {
    guarded(|| {
        if out.is_null() {
            return fail(CurvelabStatus::NullPointer, "out is null");
        }
        let text = match read_str(text, "text") {
            Ok(s) => s,
            Err(s) => return s,
        };
        match CurveSpec::from_toml_str(text).and_then(|s| s.to_curve()) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(CurvelabCurve(c)));
                CurvelabStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Ambient dimension, or 0 for a null handle.
///
/// # Safety
/// `curve` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn curvelab_curve_dim(curve: *const CurvelabCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.0.dim())
}

/// Torsion determinant at `s`.
///
/// # Safety
/// `curve` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn curvelab_curve_torsion(curve: *const CurvelabCurve, s: f64, out: *mut f64) -> CurvelabStatus {
    guarded(|| match (curve.as_ref(), out.is_null()) {
        (Some(c), false) => {
            *out = c.0.torsion_f64(s);
            CurvelabStatus::Ok
        }
        _ => fail(CurvelabStatus::NullPointer, "curve or out is null"),
    })
}

/// Writes the `dim` coordinates of the curve at `s` into `out`.
///
/// # Safety
/// `curve` must be a live handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn curvelab_curve_eval(
    curve: *const CurvelabCurve,
    s: f64,
    out: *mut f64,
    len: usize,
) -> CurvelabStatus {
    guarded(|| {
        let Some(c) = curve.as_ref() else { return fail(CurvelabStatus::NullPointer, "curve is null") };
        if out.is_null() {
            return fail(CurvelabStatus::NullPointer, "out is null");
        }
        if len < c.0.dim() {
            return fail(CurvelabStatus::Config, format!("buffer of {len} for dimension {}", c.0.dim()));
        }
        let p = c.0.eval(s);
        std::slice::from_raw_parts_mut(out, p.len()).copy_from_slice(&p);
        CurvelabStatus::Ok
    })
}

/// # Safety
/// `curve` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn curvelab_curve_free(curve: *mut CurvelabCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Runs `command` (e.g. `verify-geometric`) under a TOML run configuration.
/// A report whose checks fail is still returned with status `Ok`; inspect
/// it with [`curvelab_report_status`].
///
/// # Safety
/// `command` and `config_toml` must be NUL-terminated strings; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn curvelab_run(
    command: *const c_char,
    config_toml: *const c_char,
    out: *mut *mut CurvelabReport,
) -> CurvelabStatus {
    guarded(|| {
        if out.is_null() {
            return fail(CurvelabStatus::NullPointer, "out is null");
        }
        let (name, text) = match (read_str(command, "command"), read_str(config_toml, "config")) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let Some(cmd) = Command::from_name(name) else {
            return fail(CurvelabStatus::Config, format!("unknown command {name:?}"));
        };
        match RunConfig::from_toml_str(text).and_then(|cfg| report::run(cmd, &cfg)) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(CurvelabReport(r)));
                CurvelabStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Worst check status; `Fail` for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn curvelab_report_status(report: *const CurvelabReport) -> CurvelabCheckStatus {
    match report.as_ref().map(|r| r.0.status()) {
        Some(Status::Pass) => CurvelabCheckStatus::Pass,
        Some(Status::Warn) => CurvelabCheckStatus::Warn,
        _ => CurvelabCheckStatus::Fail,
    }
}

/// Report text, with the timing section when `with_timing` is true.
/// Release the string with [`curvelab_string_free`].
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn curvelab_report_emit(
    report: *const CurvelabReport,
    with_timing: bool,
    out: *mut *mut c_char,
) -> CurvelabStatus {
    guarded(|| {
        let Some(r) = report.as_ref() else { return fail(CurvelabStatus::NullPointer, "report is null") };
        if out.is_null() {
            return fail(CurvelabStatus::NullPointer, "out is null");
        }
        let text = if with_timing { r.0.emit() } else { r.0.body() };
        match text {
            Ok(t) => {
                *out = into_c_string(t);
                CurvelabStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// One table of the report as CSV. Release with [`curvelab_string_free`].
///
/// # Safety
/// `report` must be a live handle; `which` a NUL-terminated string; `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn curvelab_report_plot_data(
    report: *const CurvelabReport,
    which: *const c_char,
    out: *mut *mut c_char,
) -> CurvelabStatus {
    guarded(|| {
        let Some(r) = report.as_ref() else { return fail(CurvelabStatus::NullPointer, "report is null") };
        if out.is_null() {
            return fail(CurvelabStatus::NullPointer, "out is null");
        }
        let which = match read_str(which, "which") {
            Ok(s) => s,
            Err(s) => return s,
        };
        match report::emit_plot_data(&r.0, which) {
            Ok(t) => {
                *out = into_c_string(t);
                CurvelabStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn curvelab_report_free(report: *mut CurvelabReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn curvelab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
