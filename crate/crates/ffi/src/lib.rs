//! C interface to `distrisk`.
//!
//! Objects cross the boundary as opaque handles created from JSON text and
//! released with the matching `_free` function. Every fallible call returns
//! a [`DistriskStatus`] and writes its result through an out-pointer; on
//! failure the message is kept per thread and read back with
//! [`distrisk_last_error`]. Strings handed out by the library must be
//! released with [`distrisk_string_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use distrisk::{ClosedSet, DistortionFn, Error, Plrv, Spectrum};
use libc::c_char;
use serde::de::DeserializeOwned;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistriskStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed JSON or an object violating its invariants.
    Parse = 3,
    /// An argument outside the domain of the operation.
    Domain = 4,
    NotConcentrated = 5,
    SearchExhausted = 6,
    /// A Rust panic was caught at the boundary.
    Internal = 7,
}

/// Piecewise-linear random variable.
pub struct DistriskRv(Plrv);

/// Distortion function `h`.
pub struct DistriskDistortion(DistortionFn);

/// Closed index set `K ⊆ [0,1]`.
pub struct DistriskSet(ClosedSet);

/// Risk spectrum `g`.
pub struct DistriskSpectrum(Spectrum);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let text = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

struct Failure(DistriskStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Domain(_) => DistriskStatus::Domain,
            Error::Invalid(_) | Error::Json(_) => DistriskStatus::Parse,
            Error::NotConcentrated(_) => DistriskStatus::NotConcentrated,
            Error::SearchExhausted(_) => DistriskStatus::SearchExhausted,
            Error::Io(_) => DistriskStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(DistriskStatus::NullPointer, format!("{what} is null"))
}

/// Run `body`, translating errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> DistriskStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => DistriskStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error: panic caught at the C boundary".into());
            DistriskStatus::Internal
        }
    }
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Failure(DistriskStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn parse<T: DeserializeOwned>(s: *const c_char, what: &str) -> Result<T, Failure> {
    let t = text(s, what)?;
    serde_json::from_str(t).map_err(|e| Failure(DistriskStatus::Parse, format!("{what}: {e}")))
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn distrisk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn distrisk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn distrisk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn from_json<T: DeserializeOwned, H>(json: *const c_char, out: *mut *mut H, what: &str, wrap: fn(T) -> H) -> DistriskStatus {
    guard(|| {
        let value: T = parse(json, what)?;
        put(out, Box::into_raw(Box::new(wrap(value))), "out")
    })
}

unsafe fn to_json<T: serde::Serialize>(obj: Option<&T>, out: *mut *mut c_char, what: &str) -> DistriskStatus {
    guard(|| {
        let obj = obj.ok_or_else(|| null(what))?;
        let s = serde_json::to_string(obj).map_err(|e| Failure::from(Error::from(e)))?;
        put(out, owned_string(s), "out")
    })
}

unsafe fn free<H>(obj: *mut H) {
    if !obj.is_null() {
        drop(Box::from_raw(obj));
    }
}

/// Parse a random variable from JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn distrisk_rv_from_json(json: *const c_char, out: *mut *mut DistriskRv) -> DistriskStatus {
    from_json(json, out, "rv", DistriskRv)
}

/// Serialize a random variable to JSON; free the result with `distrisk_string_free`.
///
/// # Safety
/// `obj` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn distrisk_rv_to_json(obj: *const DistriskRv, out: *mut *mut c_char) -> DistriskStatus {
    to_json(obj.as_ref().map(|o| &o.0), out, "rv")
}

/// # Safety
/// `obj` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn distrisk_rv_free(obj: *mut DistriskRv) {
    free(obj)
}

/// Parse a distortion from JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn distrisk_distortion_from_json(json: *const c_char, out: *mut *mut DistriskDistortion) -> DistriskStatus {
    from_json(json, out, "distortion", DistriskDistortion)
}

/// Serialize a distortion to JSON; free the result with `distrisk_string_free`.
///
/// # Safety
/// `obj` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn distrisk_distortion_to_json(obj: *const DistriskDistortion, out: *mut *mut c_char) -> DistriskStatus {
    to_json(obj.as_ref().map(|o| &o.0), out, "distortion")
}

/// # Safety
/// `obj` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn distrisk_distortion_free(obj: *mut DistriskDistortion) {
    free(obj)
}

/// Parse an index set from JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn distrisk_set_from_json(json: *const c_char, out: *mut *mut DistriskSet) -> DistriskStatus {
    from_json(json, out, "set", DistriskSet)
}

/// Serialize an index set to JSON; free the result with `distrisk_string_free`.
///
/// # Safety
/// `obj` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn distrisk_set_to_json(obj: *const DistriskSet, out: *mut *mut c_char) -> DistriskStatus {
    to_json(obj.as_ref().map(|o| &o.0), out, "set")
}

/// # Safety
/// `obj` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn distrisk_set_free(obj: *mut DistriskSet) {
    free(obj)
}

/// Parse a spectrum from JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn distrisk_spectrum_from_json(json: *const c_char, out: *mut *mut DistriskSpectrum) -> DistriskStatus {
    from_json(json, out, "spectrum", DistriskSpectrum)
}

/// Serialize a spectrum to JSON; free the result with `distrisk_string_free`.
///
/// # Safety
/// `obj` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn distrisk_spectrum_to_json(obj: *const DistriskSpectrum, out: *mut *mut c_char) -> DistriskStatus {
    to_json(obj.as_ref().map(|o| &o.0), out, "spectrum")
}

/// # Safety
/// `obj` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn distrisk_spectrum_free(obj: *mut DistriskSpectrum) {
    free(obj)
}

unsafe fn vector(rvs: *const *const DistriskRv, n: usize) -> Result<Vec<Plrv>, Failure> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if rvs.is_null() {
        return Err(null("rvs"));
    }
    std::slice::from_raw_parts(rvs, n).iter().map(|&p| get(p, "rvs[i]").map(|x| x.0.clone())).collect()
}

/// Left (`right == false`) or right quantile at level `p`.
///
/// # Safety
/// `x` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn distrisk_quantile(x: *const DistriskRv, p: f64, right: bool, out: *mut f64) -> DistriskStatus {
    guard(|| {
        let x = get(x, "rv")?;
        let q = if right { x.0.quantile_right(p)? } else { x.0.quantile_left(p)? };
        put(out, q, "out")
    })
}

/// Expected Shortfall at level `p`.
///
/// # Safety
/// `x` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn distrisk_es(x: *const DistriskRv, p: f64, out: *mut f64) -> DistriskStatus {
    guard(|| put(out, get(x, "rv")?.0.es(p)?, "out"))
}

/// The Choquet integral `I_h(X)`.
///
/// # Safety
/// `h` and `x` must be live handles and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn distrisk_choquet(h: *const DistriskDistortion, x: *const DistriskRv, out: *mut f64) -> DistriskStatus {
    guard(|| {
        let h = get(h, "distortion")?;
        let x = get(x, "rv")?;
        put(out, h.0.choquet(&x.0), "out")
    })
}

/// The spectral risk measure `ρ_g(X)`.
///
/// # Safety
/// `g` and `x` must be live handles and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn distrisk_spectral_rho(g: *const DistriskSpectrum, x: *const DistriskRv, out: *mut f64) -> DistriskStatus {
    guard(|| {
        let g = get(g, "spectrum")?;
        let x = get(x, "rv")?;
        put(out, g.0.rho(&x.0), "out")
    })
}

/// Whether `I_h` is additive on every `K`-concentrated vector.
///
/// # Safety
/// `h` and `k` must be live handles and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn distrisk_is_k_additive(h: *const DistriskDistortion, k: *const DistriskSet, out: *mut bool) -> DistriskStatus {
    guard(|| {
        let h = get(h, "distortion")?;
        let k = get(k, "set")?;
        put(out, h.0.is_k_additive(&k.0), "out")
    })
}

/// Whether the `n` variables in `rvs` are `K`-concentrated.
///
/// # Safety
/// `rvs` must point to `n` live handles, `k` must be a live handle and
/// `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn distrisk_is_k_concentrated(
    rvs: *const *const DistriskRv,
    n: usize,
    k: *const DistriskSet,
    out: *mut bool,
) -> DistriskStatus {
    guard(|| {
        let xs = vector(rvs, n)?;
        let k = get(k, "set")?;
        put(out, distrisk::is_k_concentrated(&xs, &k.0).concentrated, "out")
    })
}

/// Full concentration verdict (certificates and refutation) as JSON.
///
/// # Safety
/// As for [`distrisk_is_k_concentrated`]; free the result with
/// `distrisk_string_free`.
#[no_mangle]
pub unsafe extern "C" fn distrisk_concentration_json(
    rvs: *const *const DistriskRv,
    n: usize,
    k: *const DistriskSet,
    out: *mut *mut c_char,
) -> DistriskStatus {
    guard(|| {
        let xs = vector(rvs, n)?;
        let k = get(k, "set")?;
        let verdict = distrisk::is_k_concentrated(&xs, &k.0);
        let s = serde_json::to_string(&verdict).map_err(|e| Failure::from(Error::from(e)))?;
        put(out, owned_string(s), "out")
    })
}

/// Search for a `K`-concentrated pair on which `I_h` is not additive.
/// `*found` is false, and the pair outputs are left untouched, when `I_h`
/// is `K`-additive.
///
/// # Safety
/// `h` and `k` must be live handles; `found`, `x_out` and `y_out` writable
/// pointers. Returned handles are owned by the caller.
#[no_mangle]
pub unsafe extern "C" fn distrisk_counterexample(
    h: *const DistriskDistortion,
    k: *const DistriskSet,
    seed: u64,
    found: *mut bool,
    x_out: *mut *mut DistriskRv,
    y_out: *mut *mut DistriskRv,
) -> DistriskStatus {
    guard(|| {
        let h = get(h, "distortion")?;
        let k = get(k, "set")?;
        if found.is_null() || x_out.is_null() || y_out.is_null() {
            return Err(null("out"));
        }
        match distrisk::counterexample(&h.0, &k.0, seed)? {
            Some((x, y)) => {
                x_out.write(Box::into_raw(Box::new(DistriskRv(x))));
                y_out.write(Box::into_raw(Box::new(DistriskRv(y))));
                found.write(true);
            }
            None => found.write(false),
        }
        Ok(())
    })
}

/// ES-mixture decomposition of a step spectrum as JSON (`null` when the
/// spectrum has sloped pieces).
///
/// # Safety
/// `g` must be a live handle and `out` a writable pointer; free the result
/// with `distrisk_string_free`.
#[no_mangle]
pub unsafe extern "C" fn distrisk_es_mixture_json(g: *const DistriskSpectrum, out: *mut *mut c_char) -> DistriskStatus {
    guard(|| {
        let g = get(g, "spectrum")?;
        let s = serde_json::to_string(&g.0.es_mixture()).map_err(|e| Failure::from(Error::from(e)))?;
        put(out, owned_string(s), "out")
    })
}
