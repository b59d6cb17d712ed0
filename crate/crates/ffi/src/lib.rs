//! C ABI over the scheduling toolchain.
//!
//! Objects are opaque heap handles freed with the matching `_free` call.
//! Every fallible call returns a `LouvreStatus`; on failure the message is
//! available from `louvre_last_error` on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use louvre::code::{compute_k, CodeSpec};
use louvre::metrics::{extract_couplers, metrics_report};
use louvre::schedule::{build_louvre7, build_louvre8, build_regular_default, Louvre7Options, Louvre8Options, Schedule};
use louvre::tracker::AbsentSiteMap;
use louvre::verify::{verify, VerifyOptions};
use louvre::Error;

pub struct LouvreCode(CodeSpec);

pub struct LouvreSchedule(Schedule);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LouvreStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidCode = 4,
    Schedule = 5,
    Verification = 6,
    Routing = 7,
    Usage = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LouvreScheme {
    Regular = 0,
    Louvre7 = 1,
    Louvre8 = 2,
}

/// Averages as exact fractions.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LouvreMetrics {
    pub degree_num: i64,
    pub degree_den: i64,
    pub distance_num: i64,
    pub distance_den: i64,
    pub couplers: u64,
    pub max_length: i64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LouvreVerifyResult {
    pub passed: bool,
    pub commutation_ok: bool,
    pub syndromes_deterministic: bool,
    pub single_fault_detection_ok: bool,
    pub restoration_ok: bool,
    pub logicals_preserved: bool,
    pub detectors: u64,
    pub logical_qubits: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> LouvreStatus {
    match e {
        Error::Parse { .. } => LouvreStatus::Parse,
        Error::InvalidCode(_) | Error::Absent { .. } => LouvreStatus::InvalidCode,
        Error::Schedule(_) | Error::Structural { .. } | Error::Search(_) => LouvreStatus::Schedule,
        Error::Verification(_) => LouvreStatus::Verification,
        Error::Routing(_) => LouvreStatus::Routing,
        Error::Usage(_) | Error::Io(_) => LouvreStatus::Usage,
    }
}

/// Runs `f`, recording errors and converting panics into `Panic`.
fn guard(f: impl FnOnce() -> Result<(), (LouvreStatus, String)>) -> LouvreStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LouvreStatus::Ok
        }
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            LouvreStatus::Panic
        }
    }
}

fn lib(e: Error) -> (LouvreStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (LouvreStatus, String) {
    (LouvreStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (LouvreStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (LouvreStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (LouvreStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

fn put<T>(out: *mut *mut T, v: T) -> Result<(), (LouvreStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    unsafe { *out = Box::into_raw(Box::new(v)) };
    Ok(())
}

/// Last error message on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn louvre_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a code file (`l=`, `m=`, `A=`, `B=` lines).
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn louvre_code_parse(text: *const c_char, out: *mut *mut LouvreCode) -> LouvreStatus {
    guard(|| {
        let t = read_text(text, "text")?;
        put(out, LouvreCode(CodeSpec::parse_file(t).map_err(lib)?))
    })
}

/// # Safety
/// `code` must come from `louvre_code_parse` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn louvre_code_free(code: *mut LouvreCode) {
    if !code.is_null() {
        drop(Box::from_raw(code));
    }
}

/// Writes the number of data qubits and logical qubits.
///
/// # Safety
/// `code` must be a live handle; `n` and `k` must be writable.
#[no_mangle]
pub unsafe extern "C" fn louvre_code_params(code: *const LouvreCode, n: *mut u64, k: *mut u64) -> LouvreStatus {
    guard(|| {
        let c = &handle(code, "code")?.0;
        if n.is_null() || k.is_null() {
            return Err(null("out"));
        }
        *n = c.n() as u64;
        *k = compute_k(c) as u64;
        Ok(())
    })
}

/// # Safety
/// `code` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn louvre_schedule_build(
    code: *const LouvreCode,
    scheme: LouvreScheme,
    out: *mut *mut LouvreSchedule,
) -> LouvreStatus {
    guard(|| {
        let c = &handle(code, "code")?.0;
        let s = match scheme {
            LouvreScheme::Regular => build_regular_default(c),
            LouvreScheme::Louvre7 => build_louvre7(c, &Louvre7Options::default()).map_err(lib)?,
            LouvreScheme::Louvre8 => build_louvre8(c, &Louvre8Options::default()).map_err(lib)?,
        };
        put(out, LouvreSchedule(s))
    })
}

/// Parses an instruction table and checks it against `code`.
///
/// # Safety
/// `code` must be a live handle, `table` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn louvre_schedule_from_table(
    code: *const LouvreCode,
    table: *const c_char,
    out: *mut *mut LouvreSchedule,
) -> LouvreStatus {
    guard(|| {
        let c = &handle(code, "code")?.0;
        let s = Schedule::from_table(read_text(table, "table")?).map_err(lib)?;
        s.validate(c).map_err(lib)?;
        put(out, LouvreSchedule(s))
    })
}

/// # Safety
/// `s` must come from a `louvre_schedule_*` constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn louvre_schedule_free(s: *mut LouvreSchedule) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Instruction table text; free with `louvre_string_free`.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn louvre_schedule_table(s: *const LouvreSchedule, out: *mut *mut c_char) -> LouvreStatus {
    guard(|| {
        let s = &handle(s, "schedule")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = CString::new(s.to_table()).map_err(|e| (LouvreStatus::Usage, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `p` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn louvre_string_free(p: *mut c_char) {
    if !p.is_null() {
        drop(CString::from_raw(p));
    }
}

/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn louvre_metrics(
    code: *const LouvreCode,
    s: *const LouvreSchedule,
    out: *mut LouvreMetrics,
) -> LouvreStatus {
    guard(|| {
        let c = &handle(code, "code")?.0;
        let s = &handle(s, "schedule")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let m = metrics_report(&extract_couplers(s, c).map_err(lib)?);
        *out = LouvreMetrics {
            degree_num: *m.avg_degree.numer(),
            degree_den: *m.avg_degree.denom(),
            distance_num: *m.avg_total_distance.numer(),
            distance_den: *m.avg_total_distance.denom(),
            couplers: m.couplers as u64,
            max_length: m.max_length,
        };
        Ok(())
    })
}

/// Runs the verifier over `rounds` rounds (at least 2). A failed verdict is
/// reported through `out`, not the status.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn louvre_verify(
    code: *const LouvreCode,
    s: *const LouvreSchedule,
    rounds: u32,
    out: *mut LouvreVerifyResult,
) -> LouvreStatus {
    guard(|| {
        let c = &handle(code, "code")?.0;
        let s = &handle(s, "schedule")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let opts = VerifyOptions { rounds: rounds as usize, ..VerifyOptions::default() };
        let r = verify(c, s, &AbsentSiteMap::none(), &opts).map_err(lib)?;
        *out = LouvreVerifyResult {
            passed: r.passed(),
            commutation_ok: r.commutation_ok,
            syndromes_deterministic: r.syndromes_deterministic,
            single_fault_detection_ok: r.single_fault_detection_ok,
            restoration_ok: r.restoration_ok,
            logicals_preserved: r.logicals_preserved,
            detectors: r.detectors as u64,
            logical_qubits: r.logical_qubits as u64,
        };
        Ok(())
    })
}
