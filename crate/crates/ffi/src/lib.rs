//! C ABI over the fan intersection cohomology library. Handles are opaque,
//! strings cross the boundary as UTF-8 JSON, and every entry point returns a
//! status code; details of the last failure are kept per thread.

use fanih::fan::io::parse_fan;
use fanih::fan::Fan;
use fanih::ihlib::ih;
use fanih::report::full_check;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Success.
pub const FANIH_OK: i32 = 0;
/// A mathematical assertion failed (a check reported a counterexample).
pub const FANIH_ERR_ASSERT: i32 = 1;
/// Invalid input: malformed document, geometric axiom violation, bad cap.
pub const FANIH_ERR_INPUT: i32 = 2;
/// A required pointer argument was null.
pub const FANIH_ERR_NULL: i32 = 3;
/// An input string was not valid UTF-8.
pub const FANIH_ERR_UTF8: i32 = 4;
/// An internal panic was caught; the library state is still usable.
pub const FANIH_ERR_PANIC: i32 = 5;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let owned = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = owned);
}

fn code_of(e: &fanih::Error) -> i32 {
    match e.exit_code() {
        1 => FANIH_ERR_ASSERT,
        _ => FANIH_ERR_INPUT,
    }
}

/// An immutable fan handle; create with `fanih_fan_parse`, release with
/// `fanih_fan_free`.
pub struct FanihFan {
    fan: Fan,
}

fn guarded<F: FnOnce() -> i32>(f: F) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&msg);
            FANIH_ERR_PANIC
        }
    }
}

/// # Safety
/// `ptr` must be null or a valid NUL-terminated string.
unsafe fn utf8_in<'a>(ptr: *const c_char) -> Result<&'a str, i32> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(FANIH_ERR_NULL);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        FANIH_ERR_UTF8
    })
}

fn string_out(out: *mut *mut c_char, text: String) -> i32 {
    let c = match CString::new(text) {
        Ok(c) => c,
        Err(_) => {
            set_error("output contained an interior NUL");
            return FANIH_ERR_PANIC;
        }
    };
    unsafe { *out = c.into_raw() };
    FANIH_OK
}

fn cap_in(cap: i64) -> Result<Option<i64>, i32> {
    if cap <= 0 {
        Ok(None)
    } else if cap >= 2 && cap % 2 == 0 {
        Ok(Some(cap))
    } else {
        set_error("cap must be even and >= 2, or <= 0 for the default");
        Err(FANIH_ERR_INPUT)
    }
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn fanih_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parse a fan-document ({"dim": …, "rays": […], "max_cones": […]}) and
/// store a handle in `out`. On failure `out` is untouched.
///
/// # Safety
/// `json` must be null or a valid NUL-terminated string; `out` must be null
/// or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fanih_fan_parse(json: *const c_char, out: *mut *mut FanihFan) -> i32 {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer");
            return FANIH_ERR_NULL;
        }
        let text = match utf8_in(json) {
            Ok(t) => t,
            Err(c) => return c,
        };
        match parse_fan(text) {
            Ok(fan) => {
                *out = Box::into_raw(Box::new(FanihFan { fan }));
                FANIH_OK
            }
            Err(e) => {
                set_error(&e.to_string());
                code_of(&e)
            }
        }
    })
}

/// Release a fan handle. Null is a no-op.
///
/// # Safety
/// `fan` must be null or a pointer obtained from `fanih_fan_parse` that has
/// not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn fanih_fan_free(fan: *mut FanihFan) {
    if !fan.is_null() {
        drop(Box::from_raw(fan));
    }
}

/// Number of cones in the fan, the origin included.
///
/// # Safety
/// `fan` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fanih_fan_cone_count(fan: *const FanihFan, out: *mut usize) -> i32 {
    guarded(|| {
        if fan.is_null() || out.is_null() {
            set_error("null argument");
            return FANIH_ERR_NULL;
        }
        *out = (*fan).fan.cones.len();
        FANIH_OK
    })
}

/// Intersection cohomology of the fan as JSON {"ih": {"degree": dim, …}}.
/// `cap` <= 0 selects the default; otherwise it must be even and >= 2.
/// The returned string is owned by the caller: free it with
/// `fanih_string_free`.
///
/// # Safety
/// `fan` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fanih_ih_json(
    fan: *const FanihFan,
    cap: i64,
    out: *mut *mut c_char,
) -> i32 {
    guarded(|| {
        if fan.is_null() || out.is_null() {
            set_error("null argument");
            return FANIH_ERR_NULL;
        }
        let cap = match cap_in(cap) {
            Ok(c) => c,
            Err(code) => return code,
        };
        match ih(&(*fan).fan, cap) {
            Ok(r) => string_out(out, serde_json::json!({"ih": r.ih.to_json()}).to_string()),
            Err(e) => {
                set_error(&e.to_string());
                code_of(&e)
            }
        }
    })
}

/// Run the full invariant suite and return its JSON report (schema
/// {"ih": …, "checks": [{"name", "pass", "witness"}, …]}). Returns
/// FANIH_ERR_ASSERT when some check fails; the report is still written.
///
/// # Safety
/// `fan` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fanih_check_json(
    fan: *const FanihFan,
    cap: i64,
    out: *mut *mut c_char,
) -> i32 {
    guarded(|| {
        if fan.is_null() || out.is_null() {
            set_error("null argument");
            return FANIH_ERR_NULL;
        }
        let cap = match cap_in(cap) {
            Ok(c) => c,
            Err(code) => return code,
        };
        match full_check(&(*fan).fan, cap) {
            Ok(report) => {
                let pass = report.pass();
                let code = string_out(out, report.to_json().to_string());
                if code != FANIH_OK {
                    code
                } else if pass {
                    FANIH_OK
                } else {
                    set_error("one or more checks failed; see the report");
                    FANIH_ERR_ASSERT
                }
            }
            Err(e) => {
                set_error(&e.to_string());
                code_of(&e)
            }
        }
    })
}

/// Free a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must be null or a string returned by this library that has not been
/// freed yet.
#[no_mangle]
pub unsafe extern "C" fn fanih_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    fn parse(doc: &str) -> *mut FanihFan {
        let c = CString::new(doc).unwrap();
        let mut fan: *mut FanihFan = ptr::null_mut();
        assert_eq!(unsafe { fanih_fan_parse(c.as_ptr(), &mut fan) }, FANIH_OK);
        assert!(!fan.is_null());
        fan
    }

    fn take_string(s: *mut c_char) -> String {
        assert!(!s.is_null());
        let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
        unsafe { fanih_string_free(s) };
        text
    }

    const QUADRANT: &str = r#"{"dim":2,
        "rays":[[1,0],[0,1],[-1,0],[0,-1]],
        "max_cones":[[0,1],[1,2],[2,3],[3,0]]}"#;

    #[test]
    fn ih_round_trip() {
        let fan = parse(QUADRANT);
        let mut count = 0usize;
        assert_eq!(unsafe { fanih_fan_cone_count(fan, &mut count) }, FANIH_OK);
        assert_eq!(count, 9);
        let mut s: *mut c_char = ptr::null_mut();
        assert_eq!(unsafe { fanih_ih_json(fan, 0, &mut s) }, FANIH_OK);
        assert_eq!(take_string(s), r#"{"ih":{"0":1,"2":2,"4":1}}"#);
        unsafe { fanih_fan_free(fan) };
    }

    #[test]
    fn check_reports_pass() {
        let fan = parse(QUADRANT);
        let mut s: *mut c_char = ptr::null_mut();
        assert_eq!(unsafe { fanih_check_json(fan, 0, &mut s) }, FANIH_OK);
        let v: serde_json::Value = serde_json::from_str(&take_string(s)).unwrap();
        assert!(v["checks"].as_array().unwrap().len() >= 8);
        unsafe { fanih_fan_free(fan) };
    }

    #[test]
    fn input_errors_and_messages() {
        let mut fan: *mut FanihFan = ptr::null_mut();
        let bad = CString::new(r#"{"dim":1}"#).unwrap();
        assert_eq!(unsafe { fanih_fan_parse(bad.as_ptr(), &mut fan) }, FANIH_ERR_INPUT);
        assert!(fan.is_null());
        let msg = unsafe { CStr::from_ptr(fanih_last_error_message()) };
        assert!(msg.to_str().unwrap().contains("missing field"));

        let overlapping =
            CString::new(r#"{"dim":2,"rays":[[1,0],[0,1],[1,1]],"max_cones":[[0,1],[0,2]]}"#)
                .unwrap();
        assert_eq!(unsafe { fanih_fan_parse(overlapping.as_ptr(), &mut fan) }, FANIH_ERR_INPUT);

        assert_eq!(unsafe { fanih_fan_parse(ptr::null(), &mut fan) }, FANIH_ERR_NULL);
        let invalid = [0xFFu8, 0];
        assert_eq!(unsafe { fanih_fan_parse(invalid.as_ptr().cast(), &mut fan) }, FANIH_ERR_UTF8);
    }

    #[test]
    fn cap_validation() {
        let fan = parse(QUADRANT);
        let mut s: *mut c_char = ptr::null_mut();
        assert_eq!(unsafe { fanih_ih_json(fan, 3, &mut s) }, FANIH_ERR_INPUT);
        assert!(s.is_null());
        assert_eq!(unsafe { fanih_ih_json(fan, 8, &mut s) }, FANIH_OK);
        assert_eq!(take_string(s), r#"{"ih":{"0":1,"2":2,"4":1}}"#);
        unsafe { fanih_fan_free(fan) };
    }

    #[test]
    fn null_handles_are_rejected() {
        let mut s: *mut c_char = ptr::null_mut();
        assert_eq!(unsafe { fanih_ih_json(ptr::null(), 0, &mut s) }, FANIH_ERR_NULL);
        assert_eq!(unsafe { fanih_check_json(ptr::null(), 0, &mut s) }, FANIH_ERR_NULL);
        let mut n = 0usize;
        assert_eq!(unsafe { fanih_fan_cone_count(ptr::null(), &mut n) }, FANIH_ERR_NULL);
        unsafe { fanih_fan_free(ptr::null_mut()) };
        unsafe { fanih_string_free(ptr::null_mut()) };
    }
}
