use std::ffi::{CStr, CString};
use std::ptr;

use louvre_ffi::*;

const BB18: &str = "l=3\nm=3\nA=1+y+xy\nB=1+x+xy\n";

unsafe fn parse(text: &str) -> *mut LouvreCode {
    let t = CString::new(text).unwrap();
    let mut code = ptr::null_mut();
    assert_eq!(louvre_code_parse(t.as_ptr(), &mut code), LouvreStatus::Ok);
    code
}

#[test]
fn build_measure_and_verify() {
    unsafe {
        let code = parse(BB18);
        let (mut n, mut k) = (0, 0);
        assert_eq!(louvre_code_params(code, &mut n, &mut k), LouvreStatus::Ok);
        assert_eq!((n, k), (18, 4));

        let mut s = ptr::null_mut();
        assert_eq!(louvre_schedule_build(code, LouvreScheme::Louvre7, &mut s), LouvreStatus::Ok);
        let mut m = LouvreMetrics::default();
        assert_eq!(louvre_metrics(code, s, &mut m), LouvreStatus::Ok);
        assert_eq!((m.degree_num, m.degree_den, m.distance_num, m.distance_den), (9, 2, 15, 2));

        let mut r = LouvreVerifyResult::default();
        assert_eq!(louvre_verify(code, s, 2, &mut r), LouvreStatus::Ok);
        assert!(r.passed);
        assert_eq!((r.detectors, r.logical_qubits), (27, 4));

        let mut text = ptr::null_mut();
        assert_eq!(louvre_schedule_table(s, &mut text), LouvreStatus::Ok);
        let table = CStr::from_ptr(text).to_str().unwrap().to_owned();
        louvre_string_free(text);
        assert!(table.contains("B1:CXSWAP"));

        let t = CString::new(table).unwrap();
        let mut s2 = ptr::null_mut();
        assert_eq!(louvre_schedule_from_table(code, t.as_ptr(), &mut s2), LouvreStatus::Ok);
        let mut m2 = LouvreMetrics::default();
        assert_eq!(louvre_metrics(code, s2, &mut m2), LouvreStatus::Ok);
        assert_eq!(m, m2);

        louvre_schedule_free(s2);
        louvre_schedule_free(s);
        louvre_code_free(code);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let bad = CString::new("l=3\nm=3\nA=1+q\nB=1+x\n").unwrap();
        let mut code = ptr::null_mut();
        assert_eq!(louvre_code_parse(bad.as_ptr(), &mut code), LouvreStatus::Parse);
        assert!(code.is_null());
        let msg = CStr::from_ptr(louvre_last_error()).to_str().unwrap();
        assert!(!msg.is_empty());

        assert_eq!(louvre_code_parse(ptr::null(), &mut code), LouvreStatus::NullPointer);
        let mut r = LouvreVerifyResult::default();
        assert_eq!(louvre_verify(ptr::null(), ptr::null(), 2, &mut r), LouvreStatus::NullPointer);

        let code = parse(BB18);
        let t = CString::new("X | A4\nZ | A1\n").unwrap();
        let mut s = ptr::null_mut();
        assert_eq!(louvre_schedule_from_table(code, t.as_ptr(), &mut s), LouvreStatus::Schedule);
        let (mut n, mut k) = (0, 0);
        assert_eq!(louvre_code_params(code, &mut n, &mut k), LouvreStatus::Ok);
        assert!(louvre_last_error().is_null());
        louvre_code_free(code);
        louvre_code_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/louvre.h")).unwrap();
    for f in [
        "louvre_last_error",
        "louvre_code_parse",
        "louvre_code_free",
        "louvre_code_params",
        "louvre_schedule_build",
        "louvre_schedule_from_table",
        "louvre_schedule_table",
        "louvre_schedule_free",
        "louvre_string_free",
        "louvre_metrics",
        "louvre_verify",
    ] {
        assert!(h.contains(&format!("{f}(")), "{f} missing");
    }
    assert!(h.contains("typedef struct LouvreCode LouvreCode;"));
}
