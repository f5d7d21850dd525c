use std::ffi::{c_char, CStr, CString};
use std::ptr;

use twistor_ffi::*;

unsafe fn take_string(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    tw_string_free(s);
    out
}

#[test]
fn hdg_dimensions_through_handles() {
    for (eps, n, k, expected) in [(-1, 1, 0, 3), (1, 2, 0, 10), (0, 2, 1, 11), (0, 2, 2, 10)] {
        unsafe {
            let mut rep = ptr::null_mut();
            assert_eq!(tw_rep_standard(eps, n, k, &mut rep), TwStatus::Ok);
            let mut line = ptr::null_mut();
            assert_eq!(tw_line_from_rep(rep, &mut line), TwStatus::Ok);
            tw_rep_free(rep);
            let (mut dim, mut formula) = (0, 0);
            assert_eq!(tw_hdg_dim(line, &mut dim), TwStatus::Ok);
            assert_eq!(tw_hdg_formula(eps, n, k, &mut formula), TwStatus::Ok);
            assert_eq!((dim, formula), (expected, expected));
            tw_line_free(line);
        }
    }
}

#[test]
fn rep_json_round_trip() {
    unsafe {
        let mut rep = ptr::null_mut();
        assert_eq!(tw_rep_standard(0, 2, 1, &mut rep), TwStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(tw_rep_to_json(rep, &mut s), TwStatus::Ok);
        let text = take_string(s);
        let c = CString::new(text.clone()).unwrap();
        let mut back = ptr::null_mut();
        assert_eq!(tw_rep_from_json(c.as_ptr(), &mut back), TwStatus::Ok);
        let (mut eps, mut n) = (9, 0);
        assert_eq!(tw_rep_info(back, &mut eps, &mut n), TwStatus::Ok);
        assert_eq!((eps, n), (0, 2));
        let mut s2 = ptr::null_mut();
        assert_eq!(tw_rep_to_json(back, &mut s2), TwStatus::Ok);
        assert_eq!(take_string(s2), text);
        tw_rep_free(rep);
        tw_rep_free(back);
    }
}

#[test]
fn line_through_two_structures() {
    unsafe {
        let mut rep = ptr::null_mut();
        assert_eq!(tw_rep_standard(-1, 1, 0, &mut rep), TwStatus::Ok);
        let mut s = ptr::null_mut();
        tw_rep_to_json(rep, &mut s);
        let v: serde_json::Value = serde_json::from_str(&take_string(s)).unwrap();
        let a = CString::new(v["I"].to_string()).unwrap();
        let b = CString::new(v["B"].to_string()).unwrap();
        let mut line = ptr::null_mut();
        assert_eq!(tw_line_through_json(a.as_ptr(), b.as_ptr(), &mut line), TwStatus::Ok);
        let mut out = ptr::null_mut();
        assert_eq!(tw_line_to_json(line, &mut out), TwStatus::Ok);
        let lv: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
        assert_eq!(lv["type"], "sphere");
        assert_eq!(
            tw_line_through_json(a.as_ptr(), a.as_ptr(), &mut line),
            TwStatus::Domain
        );
        tw_line_free(line);
        tw_rep_free(rep);
    }
}

#[test]
fn errors_map_to_codes() {
    unsafe {
        let bad = CString::new("{not json").unwrap();
        let mut rep = ptr::null_mut();
        assert_eq!(tw_rep_from_json(bad.as_ptr(), &mut rep), TwStatus::Malformed);
        assert!(rep.is_null());
        assert!(!CStr::from_ptr(tw_last_error_message()).to_bytes().is_empty());
        assert_eq!(tw_rep_from_json(ptr::null(), &mut rep), TwStatus::NullPointer);
        let mut dim = 0;
        assert_eq!(tw_hdg_formula(0, 2, 3, &mut dim), TwStatus::Domain);
    }
}

#[test]
fn small_battery() {
    unsafe {
        let mut report = ptr::null_mut();
        let mut pass = false;
        assert_eq!(tw_verify(1, 3, &mut report, &mut pass), TwStatus::Ok);
        assert!(pass);
        let v: serde_json::Value = serde_json::from_str(&take_string(report)).unwrap();
        assert_eq!(v["seed"], 3);
        assert_eq!(tw_verify(9, 3, &mut report, &mut pass), TwStatus::Malformed);
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/twistor.h")).unwrap();
    for name in [
        "typedef struct TwRep TwRep",
        "typedef struct TwLine TwLine",
        "TW_STATUS_NOT_CONVERGED",
        "tw_hdg_dim",
        "tw_last_error_message",
        "tw_string_free",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}
