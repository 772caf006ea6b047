//! C ABI over `radius_lab`.
//!
//! Objects are opaque handles created by `rl_*_new`/`rl_*_parse` and released
//! by the matching `rl_*_free`. Every fallible call returns an [`RlStatus`];
//! on failure `rl_last_error_message` describes the error for the calling
//! thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use radius_lab::chebyshev::{radius_center, PointSet, RadiusCertificate};
use radius_lab::experiment::run_json;
use radius_lab::spaces::{modulus_of_convexity, NormedSpace};
use radius_lab::wiener::{estimate_delta_m, prob_radius_upper_wiener, worst_case_radius_wiener, WienerConfig};
use radius_lab::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Unsupported = 4,
    NotOnGrid = 5,
    MisalignedWindow = 6,
    SamplingBudget = 7,
    EmptyFiber = 8,
    Infeasible = 9,
    Config = 10,
    InvalidUtf8 = 11,
    BufferTooSmall = 12,
    Panic = 13,
}

/// A normed space.
pub struct RlSpace {
    inner: NormedSpace,
}

/// Result of a Chebyshev radius computation.
pub struct RlCertificate {
    inner: RadiusCertificate,
}

/// Grid and sampling settings for the Brownian-path experiments.
pub struct RlWienerConfig {
    inner: WienerConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

fn status_of(e: &Error) -> RlStatus {
    match e {
        Error::DimensionMismatch { .. } => RlStatus::DimensionMismatch,
        Error::InvalidArgument(_) => RlStatus::InvalidArgument,
        Error::Unsupported(_) => RlStatus::Unsupported,
        Error::NotOnGrid { .. } => RlStatus::NotOnGrid,
        Error::MisalignedWindow { .. } => RlStatus::MisalignedWindow,
        Error::SamplingBudget { .. } => RlStatus::SamplingBudget,
        Error::EmptyFiber { .. } => RlStatus::EmptyFiber,
        Error::Infeasible(_) => RlStatus::Infeasible,
        Error::Config(_) => RlStatus::Config,
    }
}

/// Runs `f`, records any error or panic, and maps it to a status.
fn guard(f: impl FnOnce() -> Result<(), (RlStatus, String)>) -> RlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            RlStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RlStatus::Panic
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (RlStatus, String)>;
}

impl<T> IntoFfi<T> for radius_lab::Result<T> {
    fn ffi(self) -> Result<T, (RlStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (RlStatus, String) {
    (RlStatus::NullPointer, format!("{what} is null"))
}

unsafe fn as_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, (RlStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|e| (RlStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn as_slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (RlStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (RlStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn rl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Parses a space label such as `lp:p=4,dim=2` or `sup_plus_point:t=0.5`.
///
/// # Safety
/// `label` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_space_parse(label: *const c_char, out_space: *mut *mut RlSpace) -> RlStatus {
    guard(|| {
        let slot = out(out_space, "out")?;
        *slot = ptr::null_mut();
        let space: NormedSpace = as_str(label, "label")?.parse().ffi()?;
        *slot = Box::into_raw(Box::new(RlSpace { inner: space }));
        Ok(())
    })
}

/// # Safety
/// `space` must come from `rl_space_parse` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rl_space_free(space: *mut RlSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Norm of the vector `x[0..len]`.
///
/// # Safety
/// `x` must point to `len` doubles; `space` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rl_space_eval_norm(
    space: *const RlSpace,
    x: *const f64,
    len: usize,
    out_norm: *mut f64,
) -> RlStatus {
    guard(|| {
        let space = space.as_ref().ok_or_else(|| null("space"))?;
        let x = as_slice(x, len, "x")?;
        *out(out_norm, "out")? = space.inner.eval_vector(x).ffi()?;
        Ok(())
    })
}

/// Numeric modulus of convexity at `epsilon` (spaces of dimension 2 or 3).
///
/// # Safety
/// `space` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rl_space_modulus(
    space: *const RlSpace,
    epsilon: f64,
    tol: f64,
    out_modulus: *mut f64,
) -> RlStatus {
    guard(|| {
        let space = space.as_ref().ok_or_else(|| null("space"))?;
        *out(out_modulus, "out")? = modulus_of_convexity(&space.inner, epsilon, tol).ffi()?.value;
        Ok(())
    })
}

/// Chebyshev radius and center of `n_points` points of dimension `dim`,
/// stored row-major in `points`.
///
/// # Safety
/// `points` must hold `n_points * dim` doubles; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rl_radius_center(
    space: *const RlSpace,
    points: *const f64,
    n_points: usize,
    dim: usize,
    tol: f64,
    max_iters: usize,
    out_cert: *mut *mut RlCertificate,
) -> RlStatus {
    guard(|| {
        let slot = out(out_cert, "out")?;
        *slot = ptr::null_mut();
        let space = space.as_ref().ok_or_else(|| null("space"))?;
        if dim == 0 || n_points == 0 {
            return Err((RlStatus::InvalidArgument, "need at least one point of dimension >= 1".into()));
        }
        let total = n_points.checked_mul(dim).ok_or((RlStatus::InvalidArgument, "size overflow".into()))?;
        let flat = as_slice(points, total, "points")?;
        let set = PointSet::new(flat.chunks(dim).map(|c| c.to_vec()).collect()).ffi()?;
        let cert = radius_center(&set, &space.inner, tol, max_iters).ffi()?;
        *slot = Box::into_raw(Box::new(RlCertificate { inner: cert }));
        Ok(())
    })
}

/// # Safety
/// `cert` must come from `rl_radius_center` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rl_certificate_free(cert: *mut RlCertificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}

/// Reported radius (the attained max distance from the center); NaN for a null handle.
///
/// # Safety
/// `cert` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn rl_certificate_radius(cert: *const RlCertificate) -> f64 {
    cert.as_ref().map_or(f64::NAN, |c| c.inner.radius)
}

/// Certified lower bound on the radius; NaN for a null handle.
///
/// # Safety
/// `cert` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn rl_certificate_lower(cert: *const RlCertificate) -> f64 {
    cert.as_ref().map_or(f64::NAN, |c| c.inner.lower)
}

/// `upper - lower`; NaN for a null handle.
///
/// # Safety
/// `cert` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn rl_certificate_gap(cert: *const RlCertificate) -> f64 {
    cert.as_ref().map_or(f64::NAN, |c| c.inner.gap)
}

/// 1 if the gap met the tolerance, 0 otherwise (or for a null handle).
///
/// # Safety
/// `cert` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn rl_certificate_converged(cert: *const RlCertificate) -> i32 {
    cert.as_ref().map_or(0, |c| c.inner.converged as i32)
}

/// Dimension of the center; 0 for a null handle.
///
/// # Safety
/// `cert` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn rl_certificate_dim(cert: *const RlCertificate) -> usize {
    cert.as_ref().map_or(0, |c| c.inner.center.len())
}

/// Copies the center into `buf[0..len]`; `len` must be at least the dimension.
///
/// # Safety
/// `buf` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rl_certificate_center(cert: *const RlCertificate, buf: *mut f64, len: usize) -> RlStatus {
    guard(|| {
        let cert = cert.as_ref().ok_or_else(|| null("cert"))?;
        let c = &cert.inner.center;
        if len < c.len() {
            return Err((RlStatus::BufferTooSmall, format!("need {} doubles, got {len}", c.len())));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        std::slice::from_raw_parts_mut(buf, c.len()).copy_from_slice(c);
        Ok(())
    })
}

/// Grid with `intervals` cells (a power of two, at least 8), `n_samples`
/// conditioned paths and a seed.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rl_wiener_config_new(
    intervals: usize,
    n_samples: usize,
    seed: u64,
    out_cfg: *mut *mut RlWienerConfig,
) -> RlStatus {
    guard(|| {
        let slot = out(out_cfg, "out")?;
        *slot = ptr::null_mut();
        let cfg = WienerConfig::new(intervals, n_samples, seed).ffi()?;
        *slot = Box::into_raw(Box::new(RlWienerConfig { inner: cfg }));
        Ok(())
    })
}

/// # Safety
/// `cfg` must come from `rl_wiener_config_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rl_wiener_config_free(cfg: *mut RlWienerConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Worst-case fiber radius over the observations `ys[0..n]`.
///
/// # Safety
/// `ys` must hold `n` doubles; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rl_wiener_worst_radius(
    cfg: *const RlWienerConfig,
    ys: *const f64,
    n: usize,
    tol: f64,
    out_radius: *mut f64,
) -> RlStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        let ys = as_slice(ys, n, "ys")?;
        *out(out_radius, "out")? = worst_case_radius_wiener(&cfg.inner, ys, tol).ffi()?.value;
        Ok(())
    })
}

/// Estimated measure of paths outside the window set for `m`, with its 95% interval.
///
/// # Safety
/// Output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rl_wiener_delta_hat(
    cfg: *const RlWienerConfig,
    m: usize,
    out_delta: *mut f64,
    out_ci_lo: *mut f64,
    out_ci_hi: *mut f64,
) -> RlStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        let (d, lo, hi) = (out(out_delta, "out_delta")?, out(out_ci_lo, "out_ci_lo")?, out(out_ci_hi, "out_ci_hi")?);
        let e = estimate_delta_m(m, &cfg.inner).ffi()?;
        (*d, *lo, *hi) = (e.delta_hat, e.ci.lo, e.ci.hi);
        Ok(())
    })
}

/// Probabilistic radius bound at level `delta`: the smallest certified
/// window among `ms[0..n_ms]` and the worst fiber radius on it.
///
/// # Safety
/// Arrays must hold the stated counts; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rl_wiener_prob_radius(
    cfg: *const RlWienerConfig,
    delta: f64,
    ms: *const usize,
    n_ms: usize,
    ys: *const f64,
    n_ys: usize,
    tol: f64,
    out_m: *mut usize,
    out_bound: *mut f64,
) -> RlStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        let ms = as_slice(ms, n_ms, "ms")?;
        let ys = as_slice(ys, n_ys, "ys")?;
        let (om, ob) = (out(out_m, "out_m")?, out(out_bound, "out_bound")?);
        let b = prob_radius_upper_wiener(delta, &cfg.inner, ms, ys, tol).ffi()?;
        (*om, *ob) = (b.m, b.bound);
        Ok(())
    })
}

/// Runs an experiment from a JSON config. On success `*out_json` holds the
/// result document (release it with `rl_string_free`) and `*out_passed` is 1
/// iff every pass flag holds.
///
/// # Safety
/// `config_json` must be NUL-terminated; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rl_run_experiment(
    config_json: *const c_char,
    out_json: *mut *mut c_char,
    out_passed: *mut i32,
) -> RlStatus {
    guard(|| {
        let slot = out(out_json, "out_json")?;
        *slot = ptr::null_mut();
        let passed = out(out_passed, "out_passed")?;
        let report = run_json(as_str(config_json, "config_json")?).ffi()?;
        let text = CString::new(report.to_json()).map_err(|e| (RlStatus::Panic, e.to_string()))?;
        *passed = report.passed() as i32;
        *slot = text.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
