//! C ABI over the exact-rational twistor library. Objects are opaque
//! handles released with their `_free` function; strings returned through
//! out-pointers are released with `tw_string_free`. Every call returns a
//! `TwStatus`; on failure `tw_last_error_message` describes the error.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use twistor::battery::{run_battery, BatteryConfig};
use twistor::line::{line_through, line_to_json, TwistorLine};
use twistor::period::{hdg_dim_formula, hdg_space, HdgMode};
use twistor::rep::{rep_from_json, rep_to_json, standard_rep, AlgebraRep};
use twistor::{Error, Rational};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwStatus {
    Ok = 0,
    /// Unparseable input or unsupported sizes.
    Malformed = 1,
    /// Input violates a mathematical precondition.
    Domain = 2,
    /// An iterative solver did not converge.
    NotConverged = 3,
    NullPointer = 4,
    Panic = 5,
}

/// An embedded algebra with exact rational entries.
pub struct TwRep {
    inner: AlgebraRep<Rational>,
}

/// The line of imaginary units of an embedded algebra.
pub struct TwLine {
    inner: TwistorLine<Rational>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> TwStatus {
    set_error(&err.to_string());
    match err.exit_code() {
        1 => TwStatus::Malformed,
        3 => TwStatus::NotConverged,
        _ => TwStatus::Domain,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), TwStatus>) -> TwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TwStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            TwStatus::Panic
        }
    }
}

fn lift<T>(r: twistor::Result<T>) -> Result<T, TwStatus> {
    r.map_err(|e| status_of(&e))
}

fn null(what: &str) -> TwStatus {
    set_error(&format!("{what} is null"));
    TwStatus::NullPointer
}

unsafe fn read_json(s: *const c_char) -> Result<serde_json::Value, TwStatus> {
    if s.is_null() {
        return Err(null("JSON string"));
    }
    let text = CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("JSON string is not UTF-8");
        TwStatus::Malformed
    })?;
    serde_json::from_str(text).map_err(|e| {
        set_error(&e.to_string());
        TwStatus::Malformed
    })
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), TwStatus> {
    let c = CString::new(s).map_err(|_| {
        set_error("output contains a NUL byte");
        TwStatus::Malformed
    })?;
    *out = c.into_raw();
    Ok(())
}

fn optional_k(k: usize) -> Option<usize> {
    (k > 0).then_some(k)
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn tw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed, or be null.
#[no_mangle]
pub unsafe extern "C" fn tw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Standard representation of H(epsilon) on R^{4n}; `k` is the nilpotent
/// rank for epsilon = 0 and is ignored (pass 0) otherwise.
///
/// # Safety
/// `out` must be a valid pointer to write a handle to.
#[no_mangle]
pub unsafe extern "C" fn tw_rep_standard(epsilon: i32, n: usize, k: usize, out: *mut *mut TwRep) -> TwStatus {
    if out.is_null() {
        return null("out");
    }
    guard(|| {
        let inner = lift(standard_rep(
            epsilon,
            n,
            if epsilon == 0 { optional_k(k) } else { None },
        ))?;
        *out = Box::into_raw(Box::new(TwRep { inner }));
        Ok(())
    })
}

/// Parses a representation from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tw_rep_from_json(json: *const c_char, out: *mut *mut TwRep) -> TwStatus {
    if out.is_null() {
        return null("out");
    }
    guard(|| {
        let v = read_json(json)?;
        let inner = lift(rep_from_json(&v, 0.0))?;
        *out = Box::into_raw(Box::new(TwRep { inner }));
        Ok(())
    })
}

/// # Safety
/// `rep` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tw_rep_to_json(rep: *const TwRep, out: *mut *mut c_char) -> TwStatus {
    if rep.is_null() || out.is_null() {
        return null("argument");
    }
    guard(|| write_string(out, rep_to_json(&(*rep).inner).to_string()))
}

/// Writes epsilon and n of a representation.
///
/// # Safety
/// `rep` must be a valid handle; out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tw_rep_info(rep: *const TwRep, epsilon: *mut i32, n: *mut usize) -> TwStatus {
    if rep.is_null() || epsilon.is_null() || n.is_null() {
        return null("argument");
    }
    *epsilon = (*rep).inner.epsilon();
    *n = (*rep).inner.n();
    TwStatus::Ok
}

/// # Safety
/// `rep` must come from this library and not have been freed, or be null.
#[no_mangle]
pub unsafe extern "C" fn tw_rep_free(rep: *mut TwRep) {
    if !rep.is_null() {
        drop(Box::from_raw(rep));
    }
}

/// The line of a representation; the representation is copied.
///
/// # Safety
/// `rep` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tw_line_from_rep(rep: *const TwRep, out: *mut *mut TwLine) -> TwStatus {
    if rep.is_null() || out.is_null() {
        return null("argument");
    }
    guard(|| {
        let inner = TwistorLine::new((*rep).inner.clone());
        *out = Box::into_raw(Box::new(TwLine { inner }));
        Ok(())
    })
}

/// The line through two complex structures given as matrix JSON.
///
/// # Safety
/// Both strings must be NUL-terminated and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tw_line_through_json(a: *const c_char, b: *const c_char, out: *mut *mut TwLine) -> TwStatus {
    if out.is_null() {
        return null("out");
    }
    guard(|| {
        let a = lift(twistor::json::matrix_from_json::<Rational>(&read_json(a)?))?;
        let b = lift(twistor::json::matrix_from_json::<Rational>(&read_json(b)?))?;
        let inner = lift(line_through(&a, &b, 0.0))?;
        *out = Box::into_raw(Box::new(TwLine { inner }));
        Ok(())
    })
}

/// # Safety
/// `line` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tw_line_to_json(line: *const TwLine, out: *mut *mut c_char) -> TwStatus {
    if line.is_null() || out.is_null() {
        return null("argument");
    }
    guard(|| write_string(out, line_to_json(&(*line).inner).to_string()))
}

/// # Safety
/// `line` must come from this library and not have been freed, or be null.
#[no_mangle]
pub unsafe extern "C" fn tw_line_free(line: *mut TwLine) {
    if !line.is_null() {
        drop(Box::from_raw(line));
    }
}

/// Dimension of the classes of type (1,1) at every point of the line.
///
/// # Safety
/// `line` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tw_hdg_dim(line: *const TwLine, out: *mut usize) -> TwStatus {
    if line.is_null() || out.is_null() {
        return null("argument");
    }
    guard(|| {
        *out = lift(hdg_space(&(*line).inner, HdgMode::ClosedForm))?.dim();
        Ok(())
    })
}

/// The closed-form dimension; `k` as in `tw_rep_standard`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tw_hdg_formula(epsilon: i32, n: usize, k: usize, out: *mut usize) -> TwStatus {
    if out.is_null() {
        return null("out");
    }
    guard(|| {
        *out = lift(hdg_dim_formula(
            epsilon,
            n,
            if epsilon == 0 { optional_k(k) } else { None },
        ))?;
        Ok(())
    })
}

/// Runs the exact verification battery up to `n_max` and writes its JSON
/// report and whether every check passed.
///
/// # Safety
/// Out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tw_verify(n_max: usize, seed: u64, report: *mut *mut c_char, all_pass: *mut bool) -> TwStatus {
    if report.is_null() || all_pass.is_null() {
        return null("argument");
    }
    guard(|| {
        let cfg = BatteryConfig {
            n_max,
            seed,
            ..BatteryConfig::default()
        };
        let r = lift(run_battery::<Rational>(&cfg))?;
        *all_pass = r.all_pass;
        write_string(report, serde_json::to_string(&r).expect("report serializes"))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn error_message_is_thread_local_and_cleared() {
        let mut rep = ptr::null_mut();
        assert_eq!(unsafe { tw_rep_standard(5, 1, 0, &mut rep) }, TwStatus::Domain);
        let msg = unsafe { CStr::from_ptr(tw_last_error_message()) }
            .to_str()
            .unwrap()
            .to_owned();
        assert!(!msg.is_empty());
        assert_eq!(unsafe { tw_rep_standard(-1, 1, 0, &mut rep) }, TwStatus::Ok);
        assert!(unsafe { CStr::from_ptr(tw_last_error_message()) }.to_bytes().is_empty());
        unsafe { tw_rep_free(rep) };
    }

    #[test]
    fn null_arguments() {
        assert_eq!(
            unsafe { tw_rep_standard(-1, 1, 0, ptr::null_mut()) },
            TwStatus::NullPointer
        );
        let mut out = 0usize;
        assert_eq!(unsafe { tw_hdg_dim(ptr::null(), &mut out) }, TwStatus::NullPointer);
        unsafe { tw_rep_free(ptr::null_mut()) };
        unsafe { tw_string_free(ptr::null_mut()) };
    }
}
