use std::ffi::{CStr, CString};
use std::ptr;

use qcldpc_ffi::*;

fn build(config: &str) -> *mut QcCode {
    let cfg = CString::new(config).unwrap();
    let mut code = ptr::null_mut();
    let status = unsafe { qc_code_build(cfg.as_ptr(), &mut code) };
    assert_eq!(status, QcStatus::Ok);
    assert!(!code.is_null());
    code
}

fn params(code: *const QcCode) -> QcParams {
    let mut p = QcParams::default();
    assert_eq!(unsafe { qc_code_params(code, &mut p) }, QcStatus::Ok);
    p
}

fn last_error() -> String {
    let p = qc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn decode_round_trip_on_both_sides() {
    let code = build(r#"{"mode": "lp", "ell": 8, "seed": 5}"#);
    let p = params(code);
    assert_eq!((p.kind, p.ell, p.lift), (QcKind::Lp as u32, 8, 8));
    for (side, slen) in [(QcSide::Z, p.z_syndrome_len), (QcSide::X, p.x_syndrome_len)] {
        let mut error = vec![0u8; p.n];
        error[3] = 1;
        error[p.n - 2] = 1;
        let mut s = vec![0u8; slen];
        assert_eq!(
            unsafe { qc_code_syndrome(code, side, error.as_ptr(), p.n, s.as_mut_ptr(), slen) },
            QcStatus::Ok
        );
        let mut est = vec![0u8; p.n];
        let mut w = 0usize;
        let status = unsafe {
            qc_code_decode(
                code,
                side,
                QcMethod::LpAmplified,
                0.5,
                0.01,
                7,
                s.as_ptr(),
                slen,
                est.as_mut_ptr(),
                p.n,
                &mut w,
            )
        };
        assert_eq!(status, QcStatus::Ok);
        assert_eq!(w, est.iter().filter(|&&b| b == 1).count());
        let mut same = false;
        let status = unsafe { qc_code_coset_check(code, side, error.as_ptr(), est.as_ptr(), p.n, &mut same) };
        assert_eq!(status, QcStatus::Ok);
        assert!(same);
    }
    unsafe { qc_code_free(code) };
}

#[test]
fn bundle_json_reloads() {
    let code = build(r#"{"factor": "repetition", "ell": 4}"#);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { qc_code_to_json(code, &mut json) }, QcStatus::Ok);
    let mut again = ptr::null_mut();
    assert_eq!(unsafe { qc_code_load(json, &mut again) }, QcStatus::Ok);
    assert_eq!(params(code), params(again));
    assert_eq!(params(again).n, 32);
    unsafe {
        qc_string_free(json);
        qc_code_free(code);
        qc_code_free(again);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let mut code = ptr::null_mut();
    assert_eq!(unsafe { qc_code_load(ptr::null(), &mut code) }, QcStatus::NullPointer);
    assert!(last_error().contains("null"));

    let bad = CString::new("{not json").unwrap();
    assert_eq!(unsafe { qc_code_load(bad.as_ptr(), &mut code) }, QcStatus::Format);

    let lp24 = CString::new(r#"{"mode": "lp", "ell": 24}"#).unwrap();
    assert_eq!(
        unsafe { qc_code_build(lp24.as_ptr(), &mut code) },
        QcStatus::InvalidArgument
    );
    assert!(last_error().contains("power of two"));

    let code = build(r#"{"factor": "repetition", "ell": 4}"#);
    let p = params(code);
    let short = [0u8; 3];
    let mut s = vec![0u8; p.z_syndrome_len];
    let status = unsafe { qc_code_syndrome(code, QcSide::Z, short.as_ptr(), 3, s.as_mut_ptr(), s.len()) };
    assert_eq!(status, QcStatus::DimensionMismatch);

    let mut not_bits = vec![0u8; p.n];
    not_bits[0] = 2;
    let status = unsafe { qc_code_syndrome(code, QcSide::Z, not_bits.as_ptr(), p.n, s.as_mut_ptr(), s.len()) };
    assert_eq!(status, QcStatus::InvalidArgument);

    let mut est = vec![0u8; p.n];
    let status = unsafe {
        qc_code_decode(
            code,
            QcSide::Z,
            QcMethod::LpWeak,
            0.5,
            0.1,
            0,
            s.as_ptr(),
            s.len(),
            est.as_mut_ptr(),
            p.n,
            ptr::null_mut(),
        )
    };
    assert_eq!(status, QcStatus::InvalidArgument);
    assert_eq!(
        unsafe { qc_code_params(ptr::null(), &mut QcParams::default()) },
        QcStatus::NullPointer
    );
    unsafe { qc_code_free(code) };
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/qcldpc.h")).unwrap();
    for name in [
        "qc_last_error",
        "qc_code_build",
        "qc_code_load",
        "qc_code_free",
        "qc_code_params",
        "qc_code_syndrome",
        "qc_code_decode",
        "qc_code_coset_check",
        "qc_code_to_json",
        "qc_string_free",
        "QC_STATUS_DECODE_FAILED",
        "QC_KIND_LP",
        "typedef struct QcCode QcCode",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
