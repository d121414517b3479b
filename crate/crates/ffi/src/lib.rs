//! C ABI over a trained gpdiag diagnoser.
//!
//! Handles are opaque. Every fallible call returns a [`GpdiagStatus`]; on
//! failure [`gpdiag_last_error_message`] describes the most recent error on
//! the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use gpdiag::{Diagnoser, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GpdiagStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Shape = 5,
    InvalidArgument = 6,
    Numerical = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// A loaded extractor plus one-against-all ensemble.
pub struct GpdiagDiagnoser {
    inner: Diagnoser,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> GpdiagStatus {
    if err.is_numerical() {
        return GpdiagStatus::Numerical;
    }
    match err {
        Error::Io { .. } => GpdiagStatus::Io,
        Error::Parse { .. } | Error::Json(_) | Error::NonFinite { .. } => GpdiagStatus::Parse,
        Error::Shape(_) | Error::RecordTooShort { .. } => GpdiagStatus::Shape,
        _ => GpdiagStatus::InvalidArgument,
    }
}

struct Failure(GpdiagStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GpdiagStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GpdiagStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            GpdiagStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(GpdiagStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(GpdiagStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a>(h: *const GpdiagDiagnoser) -> Result<&'a Diagnoser, Failure> {
    h.as_ref().map(|d| &d.inner).ok_or_else(|| null("diagnoser"))
}

unsafe fn sample_arg<'a>(sample: *const f64, len: usize) -> Result<&'a [f64], Failure> {
    if sample.is_null() {
        return Err(null("sample"));
    }
    Ok(std::slice::from_raw_parts(sample, len))
}

unsafe fn emit(out: *mut *mut GpdiagDiagnoser, d: Diagnoser) -> Result<(), Failure> {
    *out = Box::into_raw(Box::new(GpdiagDiagnoser { inner: d }));
    Ok(())
}

/// Loads `model.json` and `extractor.json`. On success `*out` owns a handle
/// to release with [`gpdiag_diagnoser_free`].
///
/// # Safety
/// Paths must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gpdiag_diagnoser_load(
    model_path: *const c_char,
    extractor_path: *const c_char,
    out: *mut *mut GpdiagDiagnoser,
) -> GpdiagStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let model = str_arg(model_path, "model_path")?;
        let extractor = str_arg(extractor_path, "extractor_path")?;
        emit(out, Diagnoser::load(Path::new(model), Path::new(extractor))?)
    })
}

/// Same as [`gpdiag_diagnoser_load`] from in-memory JSON documents.
///
/// # Safety
/// Both documents must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gpdiag_diagnoser_from_json(
    model_json: *const c_char,
    extractor_json: *const c_char,
    out: *mut *mut GpdiagDiagnoser,
) -> GpdiagStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let model = str_arg(model_json, "model_json")?;
        let extractor = str_arg(extractor_json, "extractor_json")?;
        emit(out, Diagnoser::from_json(model, extractor)?)
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `h` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gpdiag_diagnoser_free(h: *mut GpdiagDiagnoser) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of classes K.
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gpdiag_diagnoser_num_classes(h: *const GpdiagDiagnoser, out: *mut usize) -> GpdiagStatus {
    guard(|| {
        let d = handle(h)?;
        *out.as_mut().ok_or_else(|| null("out"))? = d.ensemble.n_classes();
        Ok(())
    })
}

/// Values per input sample (all channels, concatenated).
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gpdiag_diagnoser_input_len(h: *const GpdiagDiagnoser, out: *mut usize) -> GpdiagStatus {
    guard(|| {
        let d = handle(h)?;
        *out.as_mut().ok_or_else(|| null("out"))? = d.input_len();
        Ok(())
    })
}

/// Copies the K class ids, ascending, into `out`.
///
/// # Safety
/// `out` must have room for `capacity` values.
#[no_mangle]
pub unsafe extern "C" fn gpdiag_diagnoser_class_ids(
    h: *const GpdiagDiagnoser,
    out: *mut u32,
    capacity: usize,
) -> GpdiagStatus {
    guard(|| {
        let d = handle(h)?;
        let ids = &d.ensemble.class_ids;
        if out.is_null() {
            return Err(null("out"));
        }
        if capacity < ids.len() {
            return Err(Failure(
                GpdiagStatus::BufferTooSmall,
                format!("need room for {} class ids", ids.len()),
            ));
        }
        std::slice::from_raw_parts_mut(out, ids.len()).copy_from_slice(ids);
        Ok(())
    })
}

/// Diagnoses one sample. Writes the raw per-class probabilities in class-id
/// order to `out_raw` and the decided class to `out_decision`.
///
/// # Safety
/// `sample` must hold `len` values and `out_raw` room for `capacity`.
#[no_mangle]
pub unsafe extern "C" fn gpdiag_diagnose(
    h: *const GpdiagDiagnoser,
    sample: *const f64,
    len: usize,
    out_raw: *mut f64,
    capacity: usize,
    out_decision: *mut u32,
) -> GpdiagStatus {
    guard(|| {
        let d = handle(h)?;
        if out_raw.is_null() || out_decision.is_null() {
            return Err(null("output buffer"));
        }
        let k = d.ensemble.n_classes();
        if capacity < k {
            return Err(Failure(
                GpdiagStatus::BufferTooSmall,
                format!("need room for {k} probabilities"),
            ));
        }
        let p = d.diagnose(sample_arg(sample, len)?)?;
        let raw = std::slice::from_raw_parts_mut(out_raw, k);
        for (slot, v) in raw.iter_mut().zip(p.raw.values()) {
            *slot = *v;
        }
        *out_decision = p.decision;
        Ok(())
    })
}

/// Diagnoses one sample and returns the full report as JSON
/// (`raw`, `normalized`, `decision`, `runner_up`). Free the string with
/// [`gpdiag_string_free`].
///
/// # Safety
/// `sample` must hold `len` values; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gpdiag_diagnose_json(
    h: *const GpdiagDiagnoser,
    sample: *const f64,
    len: usize,
    out_json: *mut *mut c_char,
) -> GpdiagStatus {
    guard(|| {
        let d = handle(h)?;
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        let p = d.diagnose(sample_arg(sample, len)?)?;
        let text = serde_json::to_string(&p).map_err(Error::from)?;
        *out_json = CString::new(text).expect("json has no nul").into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gpdiag_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread; empty if none. Valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gpdiag_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn gpdiag_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
