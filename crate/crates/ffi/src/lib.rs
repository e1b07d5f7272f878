//! C ABI over `qcldpc`.
//!
//! Codes are opaque `QcCode` handles. Every function returns a `QcStatus`;
//! on failure `qc_last_error` describes the most recent error on the calling
//! thread. Bit vectors cross the boundary as one byte per bit (0 or 1).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qcldpc::bundle::CodeBundle;
use qcldpc::f2::BitVec;
use qcldpc::harness::{build_code, BuiltCode, ExperimentConfig};
use qcldpc::product::{CssSide, Method, ProductKind};
use qcldpc::Error;

/// Opaque code handle.
pub struct QcCode {
    built: BuiltCode,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Format = 4,
    Io = 5,
    /// The decoder returned no estimate; the estimate buffer is zeroed.
    DecodeFailed = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QcSide {
    Z = 0,
    X = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QcKind {
    Hgp = 0,
    Lp = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QcMethod {
    HgpDeterministic = 0,
    HgpRandomized = 1,
    LpWeak = 2,
    LpAmplified = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QcParams {
    pub kind: u32,
    /// Number of qubits.
    pub n: usize,
    pub ell: usize,
    pub lift: usize,
    pub z_syndrome_len: usize,
    pub x_syndrome_len: usize,
    pub lambda: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> QcStatus {
    match e {
        Error::DimensionMismatch { .. } | Error::RingMismatch { .. } => QcStatus::DimensionMismatch,
        Error::Format(_) | Error::Json(_) | Error::Csv(_) => QcStatus::Format,
        Error::Io(_) => QcStatus::Io,
        Error::Stage { source, .. } => status_of(source),
        _ => QcStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<QcStatus, (QcStatus, String)>) -> QcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            QcStatus::Internal
        }
    }
}

fn lib_err(e: Error) -> (QcStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (QcStatus, String) {
    (QcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn code_ref<'a>(code: *const QcCode) -> Result<&'a QcCode, (QcStatus, String)> {
    // SAFETY: the caller passes a handle from `qc_code_build`/`qc_code_load` that has not been freed.
    unsafe { code.as_ref() }.ok_or_else(|| null("code"))
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, (QcStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    // SAFETY: the caller passes a NUL-terminated string.
    unsafe { CStr::from_ptr(s) }
        .to_str()
        .map_err(|_| (QcStatus::Format, format!("{what} is not UTF-8")))
}

unsafe fn bits_in(p: *const u8, len: usize, expected: usize, what: &str) -> Result<BitVec, (QcStatus, String)> {
    if len != expected {
        return Err((
            QcStatus::DimensionMismatch,
            format!("{what}: expected {expected} bytes, got {len}"),
        ));
    }
    if p.is_null() && len > 0 {
        return Err(null(what));
    }
    let bytes = if len == 0 {
        &[][..]
    } else {
        // SAFETY: the caller guarantees `len` readable bytes at `p`.
        unsafe { std::slice::from_raw_parts(p, len) }
    };
    if bytes.iter().any(|&b| b > 1) {
        return Err((QcStatus::InvalidArgument, format!("{what} bytes must be 0 or 1")));
    }
    Ok(BitVec::from_bools(&bytes.iter().map(|&b| b == 1).collect::<Vec<_>>()))
}

unsafe fn bits_out(v: &BitVec, p: *mut u8, len: usize, what: &str) -> Result<(), (QcStatus, String)> {
    if len != v.len() {
        return Err((
            QcStatus::DimensionMismatch,
            format!("{what}: expected {} bytes, got {len}", v.len()),
        ));
    }
    if p.is_null() && len > 0 {
        return Err(null(what));
    }
    for i in 0..len {
        // SAFETY: the caller guarantees `len` writable bytes at `p`.
        unsafe { *p.add(i) = u8::from(v.get(i)) };
    }
    Ok(())
}

fn side_of(side: QcSide) -> CssSide {
    match side {
        QcSide::Z => CssSide::Z,
        QcSide::X => CssSide::X,
    }
}

fn syndrome_len(code: &QcCode, side: CssSide) -> usize {
    let z = code.built.code.side(CssSide::Z);
    match side {
        CssSide::Z => z.n0() * z.ell(),
        CssSide::X => z.n1() * z.ell(),
    }
}

unsafe fn emit(out: *mut *mut QcCode, built: BuiltCode) -> Result<QcStatus, (QcStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    let handle = Box::into_raw(Box::new(QcCode { built }));
    // SAFETY: `out` is non-null and writable per the caller.
    unsafe { *out = handle };
    Ok(QcStatus::Ok)
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a code from a JSON config (null for defaults).
///
/// # Safety
/// `config_json` is null or a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn qc_code_build(config_json: *const c_char, out: *mut *mut QcCode) -> QcStatus {
    guard(|| {
        let cfg = if config_json.is_null() {
            ExperimentConfig::default()
        } else {
            let text = unsafe { str_arg(config_json, "config_json")? };
            serde_json::from_str(text).map_err(|e| (QcStatus::Format, e.to_string()))?
        };
        let built = build_code(&cfg).map_err(lib_err)?;
        unsafe { emit(out, built) }
    })
}

/// Loads a code from bundle JSON, checking every stored ring form.
///
/// # Safety
/// `bundle_json` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn qc_code_load(bundle_json: *const c_char, out: *mut *mut QcCode) -> QcStatus {
    guard(|| {
        let text = unsafe { str_arg(bundle_json, "bundle_json")? };
        let bundle = CodeBundle::from_json(text).map_err(lib_err)?;
        let built = BuiltCode::from_bundle(bundle).map_err(lib_err)?;
        unsafe { emit(out, built) }
    })
}

/// # Safety
/// `code` is null or a live handle; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qc_code_free(code: *mut QcCode) {
    if !code.is_null() {
        // SAFETY: the handle came from `Box::into_raw` in `emit`.
        drop(unsafe { Box::from_raw(code) });
    }
}

/// # Safety
/// `code` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn qc_code_params(code: *const QcCode, out: *mut QcParams) -> QcStatus {
    guard(|| {
        let code = unsafe { code_ref(code)? };
        if out.is_null() {
            return Err(null("out"));
        }
        let c = &code.built.code;
        let p = QcParams {
            kind: match c.kind() {
                ProductKind::Hgp => QcKind::Hgp as u32,
                ProductKind::Lp => QcKind::Lp as u32,
            },
            n: c.n(),
            ell: c.ell(),
            lift: c.tanner().ell(),
            z_syndrome_len: syndrome_len(code, CssSide::Z),
            x_syndrome_len: syndrome_len(code, CssSide::X),
            lambda: code.built.lift_report().lambda,
        };
        unsafe { *out = p };
        Ok(QcStatus::Ok)
    })
}

/// Writes the syndrome of `error` on `side`.
///
/// # Safety
/// `code` is a live handle; the buffers hold the stated number of bytes.
#[no_mangle]
pub unsafe extern "C" fn qc_code_syndrome(
    code: *const QcCode,
    side: QcSide,
    error: *const u8,
    error_len: usize,
    syndrome: *mut u8,
    syndrome_len: usize,
) -> QcStatus {
    guard(|| {
        let code = unsafe { code_ref(code)? };
        let c = unsafe { bits_in(error, error_len, code.built.code.n(), "error")? };
        let s = code.built.code.syndrome(side_of(side), &c).map_err(lib_err)?;
        unsafe { bits_out(&s, syndrome, syndrome_len, "syndrome")? };
        Ok(QcStatus::Ok)
    })
}

/// Decodes a syndrome. `eps` applies to `LpAmplified`, `failure_delta` to the
/// randomized and amplified methods.
///
/// # Safety
/// `code` is a live handle; the buffers hold the stated number of bytes;
/// `out_weight` is null or writable.
#[no_mangle]
pub unsafe extern "C" fn qc_code_decode(
    code: *const QcCode,
    side: QcSide,
    method: QcMethod,
    eps: f64,
    failure_delta: f64,
    seed: u64,
    syndrome: *const u8,
    syndrome_len: usize,
    estimate: *mut u8,
    estimate_len: usize,
    out_weight: *mut usize,
) -> QcStatus {
    guard(|| {
        let code = unsafe { code_ref(code)? };
        let side = side_of(side);
        let s = unsafe { bits_in(syndrome, syndrome_len, self::syndrome_len(code, side), "syndrome")? };
        let method = match method {
            QcMethod::HgpDeterministic => Method::HgpDeterministic,
            QcMethod::HgpRandomized => Method::HgpRandomized { delta: failure_delta },
            QcMethod::LpWeak => Method::LpWeak,
            QcMethod::LpAmplified => Method::LpAmplified {
                eps,
                delta: failure_delta,
            },
        };
        let out = code.built.code.decode(side, &s, method, seed).map_err(lib_err)?;
        unsafe { bits_out(&out.estimate, estimate, estimate_len, "estimate")? };
        if !out_weight.is_null() {
            unsafe { *out_weight = out.weight };
        }
        if out.is_ok() {
            Ok(QcStatus::Ok)
        } else {
            Err((QcStatus::DecodeFailed, "decoder returned no estimate".into()))
        }
    })
}

/// Sets `*same_coset` to whether `error + estimate` is a stabilizer of `side`.
///
/// # Safety
/// `code` is a live handle; both buffers hold `len` bytes; `same_coset` is writable.
#[no_mangle]
pub unsafe extern "C" fn qc_code_coset_check(
    code: *const QcCode,
    side: QcSide,
    error: *const u8,
    estimate: *const u8,
    len: usize,
    same_coset: *mut bool,
) -> QcStatus {
    guard(|| {
        let code = unsafe { code_ref(code)? };
        let n = code.built.code.n();
        let c = unsafe { bits_in(error, len, n, "error")? };
        let e = unsafe { bits_in(estimate, len, n, "estimate")? };
        if same_coset.is_null() {
            return Err(null("same_coset"));
        }
        let side = side_of(side);
        let verdict = match code.built.code.coset_witness(side, &c, &e).map_err(lib_err)? {
            Some(w) => code.built.code.verify_witness(side, &c, &e, &w).map_err(lib_err)?,
            None => false,
        };
        unsafe { *same_coset = verdict };
        Ok(QcStatus::Ok)
    })
}

/// Serializes the code bundle. Free the string with `qc_string_free`.
///
/// # Safety
/// `code` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn qc_code_to_json(code: *const QcCode, out: *mut *mut c_char) -> QcStatus {
    guard(|| {
        let code = unsafe { code_ref(code)? };
        if out.is_null() {
            return Err(null("out"));
        }
        let json = code.built.bundle.to_json().map_err(lib_err)?;
        let c = CString::new(json).map_err(|_| (QcStatus::Internal, "bundle JSON contains NUL".into()))?;
        unsafe { *out = c.into_raw() };
        Ok(QcStatus::Ok)
    })
}

/// # Safety
/// `s` is null or came from `qc_code_to_json`, and is freed once.
#[no_mangle]
pub unsafe extern "C" fn qc_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: `s` came from `CString::into_raw`.
        drop(unsafe { CString::from_raw(s) });
    }
}
