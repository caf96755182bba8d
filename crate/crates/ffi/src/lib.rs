//! C ABI for the treeid identification engine.
//!
//! Models and reports are opaque handles created and released through this
//! interface. Every fallible call returns a [`TreeidStatus`]; on failure a
//! message is available from [`treeid_last_error`] on the same thread.
//! Strings returned through out-pointers are owned by the caller and must be
//! released with [`treeid_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use treeid::fastp::syntax::serialize_fastp;
use treeid::{run_identification, IdentConfig, IdentError, IdentReport, Status, TreeScm};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeidStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidModel = 3,
    PitBudget = 4,
    Inconsistent = 5,
    OutOfRange = 6,
    InvalidArgument = 7,
    Panic = 8,
}

/// Identifiability class of one parameter.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeidNodeStatus {
    Identifiable = 0,
    TwoIdentifiable = 1,
    Unidentifiable = 2,
}

/// Opaque model handle.
pub struct TreeidModel {
    inner: TreeScm,
}

/// Opaque report handle.
pub struct TreeidReport {
    inner: IdentReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: TreeidStatus, msg: impl Into<String>) -> TreeidStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning panics into `Panic` and recording errors.
fn guarded(f: impl FnOnce() -> TreeidStatus) -> TreeidStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(TreeidStatus::Panic, "internal panic"),
    }
}

fn ident_status(e: &IdentError) -> TreeidStatus {
    match e {
        IdentError::Model(_) => TreeidStatus::InvalidModel,
        IdentError::Pit(_) => TreeidStatus::PitBudget,
        IdentError::Contract(_) | IdentError::DegeneratePropagation { .. } => TreeidStatus::Inconsistent,
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, TreeidStatus> {
    if p.is_null() {
        return Err(fail(TreeidStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(TreeidStatus::InvalidUtf8, "string argument is not UTF-8"))
}

fn give_string(s: String, out: *mut *mut c_char) -> TreeidStatus {
    match CString::new(s) {
        Ok(c) => {
            // SAFETY: caller checked `out` is non-null
            unsafe { *out = c.into_raw() };
            TreeidStatus::Ok
        }
        Err(_) => fail(TreeidStatus::InvalidArgument, "output contains a NUL byte"),
    }
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn treeid_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn treeid_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a model from JSON or DOT text.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn treeid_model_parse(text: *const c_char, out: *mut *mut TreeidModel) -> TreeidStatus {
    guarded(|| {
        if out.is_null() {
            return fail(TreeidStatus::NullArgument, "null output pointer");
        }
        *out = ptr::null_mut();
        let text = match read_str(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match TreeScm::parse(text) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(TreeidModel { inner: m }));
                TreeidStatus::Ok
            }
            Err(e) => fail(TreeidStatus::InvalidModel, e.to_string()),
        }
    })
}

/// Number of non-root nodes `n`, or 0 for NULL.
///
/// # Safety
/// `model` must be NULL or a handle from [`treeid_model_parse`].
#[no_mangle]
pub unsafe extern "C" fn treeid_model_n(model: *const TreeidModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.n())
}

/// Releases a model. NULL is ignored.
///
/// # Safety
/// `model` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn treeid_model_free(model: *mut TreeidModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Identifies every parameter of `model`. `error_prob` of 0 selects the
/// default target of 2^-40.
///
/// # Safety
/// `model` must be a live model handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn treeid_identify(
    model: *const TreeidModel,
    seed: u64,
    error_prob: f64,
    out: *mut *mut TreeidReport,
) -> TreeidStatus {
    guarded(|| {
        if out.is_null() {
            return fail(TreeidStatus::NullArgument, "null output pointer");
        }
        *out = ptr::null_mut();
        let Some(model) = model.as_ref() else {
            return fail(TreeidStatus::NullArgument, "null model");
        };
        let mut cfg = IdentConfig::with_seed(seed);
        if error_prob != 0.0 {
            if !(error_prob > 0.0 && error_prob < 1.0) {
                return fail(TreeidStatus::InvalidArgument, format!("error probability {error_prob} not in (0, 1)"));
            }
            cfg.error_prob = error_prob;
        }
        match run_identification(&model.inner, &cfg) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(TreeidReport { inner: r }));
                TreeidStatus::Ok
            }
            Err(e) => fail(ident_status(&e), e.to_string()),
        }
    })
}

/// Releases a report. NULL is ignored.
///
/// # Safety
/// `report` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn treeid_report_free(report: *mut TreeidReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

unsafe fn node_status<'a>(report: *const TreeidReport, node: usize) -> Result<&'a Status, TreeidStatus> {
    let report = report
        .as_ref()
        .ok_or_else(|| fail(TreeidStatus::NullArgument, "null report"))?;
    report
        .inner
        .node(node)
        .map(|r| &r.status)
        .ok_or_else(|| fail(TreeidStatus::OutOfRange, format!("node {node} is not a non-root node of the model")))
}

/// Status of the parameter of `node` (1..=n).
///
/// # Safety
/// `report` must be a live report handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn treeid_report_status(
    report: *const TreeidReport,
    node: usize,
    out: *mut TreeidNodeStatus,
) -> TreeidStatus {
    guarded(|| {
        if out.is_null() {
            return fail(TreeidStatus::NullArgument, "null output pointer");
        }
        match node_status(report, node) {
            Ok(s) => {
                *out = match s {
                    Status::Identifiable(_) => TreeidNodeStatus::Identifiable,
                    Status::TwoIdentifiable(..) => TreeidNodeStatus::TwoIdentifiable,
                    Status::Unidentifiable => TreeidNodeStatus::Unidentifiable,
                };
                TreeidStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// Closed form of branch `branch` (0, or 1 for the second of a pair) of the
/// parameter of `node`, in the textual expression syntax.
///
/// # Safety
/// `report` must be a live report handle; `out` must be a valid pointer.
/// The returned string must be released with [`treeid_string_free`].
#[no_mangle]
pub unsafe extern "C" fn treeid_report_fastp(
    report: *const TreeidReport,
    node: usize,
    branch: usize,
    out: *mut *mut c_char,
) -> TreeidStatus {
    guarded(|| {
        if out.is_null() {
            return fail(TreeidStatus::NullArgument, "null output pointer");
        }
        *out = ptr::null_mut();
        let status = match node_status(report, node) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match status.fastps().get(branch) {
            Some(f) => give_string(serialize_fastp(f), out),
            None => fail(
                TreeidStatus::OutOfRange,
                format!("node {node} has no closed form with index {branch}"),
            ),
        }
    })
}

/// Full report as pretty-printed JSON.
///
/// # Safety
/// `report` must be a live report handle; `out` must be a valid pointer.
/// The returned string must be released with [`treeid_string_free`].
#[no_mangle]
pub unsafe extern "C" fn treeid_report_json(report: *const TreeidReport, out: *mut *mut c_char) -> TreeidStatus {
    guarded(|| {
        if out.is_null() {
            return fail(TreeidStatus::NullArgument, "null output pointer");
        }
        *out = ptr::null_mut();
        match report.as_ref() {
            Some(r) => give_string(r.inner.to_json(), out),
            None => fail(TreeidStatus::NullArgument, "null report"),
        }
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn treeid_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
