//! C ABI over `pdrs-core`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` /
//! `*_generate` / `*_read` functions and released by the matching `*_free`.
//! Every fallible call returns a [`PdrsStatus`]; on failure a description is
//! available from [`pdrs_last_error`] on the same thread. Panics are caught
//! and reported as [`PdrsStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pdrs_core::detectors::{
    detect_bomp, detect_fpr, detect_pdrs_dwe, fpr_gram_pinv, oracle_support, DetectionResult,
};
use pdrs_core::harness::{parse_config, run_lemma_checks, PointContext};
use pdrs_core::scenario::{read_frame, write_frame, PdrsCodebook, PilotPool, ReceivedFrame, SystemConfig};
use pdrs_core::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PdrsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    Format = 4,
    Config = 5,
    Io = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Detector selector for [`pdrs_detect`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PdrsDetector {
    Pdrs = 0,
    Bomp = 1,
    Fpr = 2,
    Oracle = 3,
}

/// System configuration.
pub struct PdrsConfig(SystemConfig);

/// Pilot pool and PDRS codebook of one configuration.
pub struct PdrsContext(PointContext);

/// One received frame together with the pool and codebook it was built from.
pub struct PdrsFrame {
    frame: ReceivedFrame,
    pool: PilotPool,
    codebook: PdrsCodebook,
}

/// Output of a detector.
pub struct PdrsResult(DetectionResult);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> PdrsStatus {
    match e {
        Error::InvalidArgument(_) => PdrsStatus::InvalidArgument,
        Error::Numerical(_) => PdrsStatus::Numerical,
        Error::Format(_) => PdrsStatus::Format,
        Error::Config(_) => PdrsStatus::Config,
        Error::Trial { source, .. } => status_of(source),
        Error::Io(_) | Error::Csv(_) => PdrsStatus::Io,
    }
}

struct Fail(PdrsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(PdrsStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PdrsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            PdrsStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            PdrsStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn as_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    unsafe { p.as_mut() }.ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    let slot = unsafe { as_mut(out, "output handle")? };
    *slot = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Fail(PdrsStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Copies `src` into `buf[..cap]`; `*written` receives `src.len()` even when
/// the buffer is too small.
unsafe fn copy_out<T: Copy>(src: &[T], buf: *mut T, cap: usize, written: *mut usize) -> Result<(), Fail> {
    if let Some(w) = unsafe { written.as_mut() } {
        *w = src.len();
    }
    if src.is_empty() {
        return Ok(());
    }
    if buf.is_null() {
        return Err(null("buffer"));
    }
    if cap < src.len() {
        return Err(Fail(
            PdrsStatus::BufferTooSmall,
            format!("buffer holds {cap} entries, {} needed", src.len()),
        ));
    }
    unsafe { ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len()) };
    Ok(())
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn pdrs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pdrs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Large-scale default configuration (M=128, N=1000, L=96, l=4, K=ζ=96, 4 dB).
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn pdrs_config_new_default(out: *mut *mut PdrsConfig) -> PdrsStatus {
    guard(|| unsafe { put(out, PdrsConfig(SystemConfig::large_scale())) })
}

/// Noiseless small configuration with `ζ = K`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn pdrs_config_new_small(
    antennas: usize,
    pool_size: usize,
    pilot_len: usize,
    active_users: usize,
    out: *mut *mut PdrsConfig,
) -> PdrsStatus {
    guard(|| {
        let cfg = SystemConfig::small(antennas, pool_size, pilot_len, active_users);
        cfg.validate()?;
        unsafe { put(out, PdrsConfig(cfg)) }
    })
}

/// Parses `key = value` configuration text.
///
/// # Safety
/// `text` must be NUL-terminated; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pdrs_config_from_text(text: *const c_char, out: *mut *mut PdrsConfig) -> PdrsStatus {
    guard(|| {
        let cfg = parse_config(unsafe { c_str(text, "text")? })?;
        unsafe { put(out, PdrsConfig(cfg)) }
    })
}

fn update(cfg: *mut PdrsConfig, f: impl FnOnce(&mut SystemConfig)) -> PdrsStatus {
    guard(|| {
        let c = unsafe { as_mut(cfg, "config")? };
        let mut next = c.0.clone();
        f(&mut next);
        next.validate()?;
        c.0 = next;
        Ok(())
    })
}

/// SNR in dB; `INFINITY` means noiseless. The config is unchanged on failure.
///
/// # Safety
/// `cfg` must be a live handle from `pdrs_config_*`.
#[no_mangle]
pub unsafe extern "C" fn pdrs_config_set_snr_db(cfg: *mut PdrsConfig, snr_db: f64) -> PdrsStatus {
    update(cfg, |c| c.snr_db = snr_db)
}

/// PDRS length `l`.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pdrs_config_set_pdrs_len(cfg: *mut PdrsConfig, pdrs_len: usize) -> PdrsStatus {
    update(cfg, |c| c.pdrs_len = pdrs_len)
}

/// Sets `ζ = round(α·K)`.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pdrs_config_set_alpha(cfg: *mut PdrsConfig, alpha: f64) -> PdrsStatus {
    if !(alpha.is_finite() && alpha > 0.0) {
        set_last_error("alpha must be finite and positive");
        return PdrsStatus::InvalidArgument;
    }
    update(cfg, |c| c.set_alpha(alpha))
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pdrs_config_set_seed(cfg: *mut PdrsConfig, seed: u64) -> PdrsStatus {
    update(cfg, |c| c.seed = seed)
}

/// Number of data symbols `D` per frame.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pdrs_config_set_data_len(cfg: *mut PdrsConfig, data_len: usize) -> PdrsStatus {
    update(cfg, |c| c.data_len = data_len)
}

/// Current `ζ`.
///
/// # Safety
/// `cfg` must be a live handle; `zeta` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pdrs_config_zeta(cfg: *const PdrsConfig, zeta: *mut usize) -> PdrsStatus {
    guard(|| {
        let c = unsafe { as_ref(cfg, "config")? };
        *unsafe { as_mut(zeta, "zeta")? } = c.0.zeta;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or a live handle not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pdrs_config_free(cfg: *mut PdrsConfig) {
    unsafe { free(cfg) }
}

/// Draws the pilot pool and codebook of `cfg`.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pdrs_context_new(cfg: *const PdrsConfig, out: *mut *mut PdrsContext) -> PdrsStatus {
    guard(|| {
        let c = unsafe { as_ref(cfg, "config")? };
        let ctx = PointContext::new(&c.0, false)?;
        unsafe { put(out, PdrsContext(ctx)) }
    })
}

/// # Safety
/// `ctx` must be null or a live handle not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pdrs_context_free(ctx: *mut PdrsContext) {
    unsafe { free(ctx) }
}

/// Frame of trial `trial_index`; identical to the simulator's trial.
///
/// # Safety
/// `ctx` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pdrs_frame_generate(
    ctx: *const PdrsContext,
    trial_index: u64,
    out: *mut *mut PdrsFrame,
) -> PdrsStatus {
    guard(|| {
        let c = unsafe { as_ref(ctx, "context")? };
        let frame = c.0.frame(trial_index)?;
        unsafe {
            put(
                out,
                PdrsFrame {
                    frame,
                    pool: c.0.pool.clone(),
                    codebook: c.0.codebook.clone(),
                },
            )
        }
    })
}

/// Reads a frame file.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pdrs_frame_read(path: *const c_char, out: *mut *mut PdrsFrame) -> PdrsStatus {
    guard(|| {
        let f = read_frame(unsafe { c_str(path, "path")? })?;
        unsafe {
            put(
                out,
                PdrsFrame {
                    frame: f.frame,
                    pool: f.pool,
                    codebook: f.codebook,
                },
            )
        }
    })
}

/// Writes a frame file.
///
/// # Safety
/// `frame` must be a live handle; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn pdrs_frame_write(frame: *const PdrsFrame, path: *const c_char) -> PdrsStatus {
    guard(|| {
        let f = unsafe { as_ref(frame, "frame")? };
        write_frame(unsafe { c_str(path, "path")? }, &f.frame, &f.pool, &f.codebook)?;
        Ok(())
    })
}

/// Dimensions of a frame.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PdrsFrameDims {
    pub antennas: usize,
    pub pool_size: usize,
    pub pilot_len: usize,
    pub pdrs_len: usize,
    pub data_len: usize,
    pub active_users: usize,
}

/// # Safety
/// `frame` must be a live handle; `dims` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pdrs_frame_dims(frame: *const PdrsFrame, dims: *mut PdrsFrameDims) -> PdrsStatus {
    guard(|| {
        let f = unsafe { as_ref(frame, "frame")? };
        *unsafe { as_mut(dims, "dims")? } = PdrsFrameDims {
            antennas: f.frame.y.rows(),
            pool_size: f.pool.size(),
            pilot_len: f.pool.pilot_len(),
            pdrs_len: f.frame.y_r.cols(),
            data_len: f.frame.y_d.cols(),
            active_users: f.frame.ground_truth.count(),
        };
        Ok(())
    })
}

/// Ground-truth active indices, ascending.
///
/// # Safety
/// `frame` must be a live handle; `buf` must hold `cap` entries.
#[no_mangle]
pub unsafe extern "C" fn pdrs_frame_active(
    frame: *const PdrsFrame,
    buf: *mut usize,
    cap: usize,
    written: *mut usize,
) -> PdrsStatus {
    guard(|| {
        let f = unsafe { as_ref(frame, "frame")? };
        unsafe { copy_out(f.frame.ground_truth.active(), buf, cap, written) }
    })
}

/// # Safety
/// `frame` must be null or a live handle not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pdrs_frame_free(frame: *mut PdrsFrame) {
    unsafe { free(frame) }
}

/// Runs a detector with support size `zeta`.
///
/// # Safety
/// `frame` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pdrs_detect(
    frame: *const PdrsFrame,
    detector: PdrsDetector,
    zeta: usize,
    out: *mut *mut PdrsResult,
) -> PdrsStatus {
    guard(|| {
        let f = unsafe { as_ref(frame, "frame")? };
        let r = match detector {
            PdrsDetector::Pdrs => detect_pdrs_dwe(&f.frame, &f.pool, &f.codebook, zeta)?,
            PdrsDetector::Bomp => detect_bomp(&f.frame, &f.pool, zeta)?,
            PdrsDetector::Fpr => detect_fpr(&f.frame, &f.pool, zeta, &fpr_gram_pinv(&f.pool)?)?,
            PdrsDetector::Oracle => oracle_support(&f.frame),
        };
        unsafe { put(out, PdrsResult(r)) }
    })
}

/// Detected indices, best first.
///
/// # Safety
/// `res` must be a live handle; `buf` must hold `cap` entries.
#[no_mangle]
pub unsafe extern "C" fn pdrs_result_support(
    res: *const PdrsResult,
    buf: *mut usize,
    cap: usize,
    written: *mut usize,
) -> PdrsStatus {
    guard(|| {
        let r = unsafe { as_ref(res, "result")? };
        unsafe { copy_out(&r.0.support, buf, cap, written) }
    })
}

/// Score of each support entry.
///
/// # Safety
/// `res` must be a live handle; `buf` must hold `cap` entries.
#[no_mangle]
pub unsafe extern "C" fn pdrs_result_scores(
    res: *const PdrsResult,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> PdrsStatus {
    guard(|| {
        let r = unsafe { as_ref(res, "result")? };
        unsafe { copy_out(&r.0.scores, buf, cap, written) }
    })
}

/// Complex and real multiplications spent by the detector.
///
/// # Safety
/// `res` must be a live handle; output pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pdrs_result_mults(res: *const PdrsResult, complex: *mut u64, real: *mut u64) -> PdrsStatus {
    guard(|| {
        let r = unsafe { as_ref(res, "result")? };
        *unsafe { as_mut(complex, "complex")? } = r.0.mult_count;
        *unsafe { as_mut(real, "real")? } = r.0.real_mult_count;
        Ok(())
    })
}

/// # Safety
/// `res` must be null or a live handle not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pdrs_result_free(res: *mut PdrsResult) {
    unsafe { free(res) }
}

/// Runs the pseudo-inverse and combining-equivalence suites. `iterations == 0`
/// and `tol <= 0` select the defaults.
///
/// # Safety
/// `all_passed` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pdrs_lemma_check(iterations: usize, tol: f64, seed: u64, all_passed: *mut bool) -> PdrsStatus {
    guard(|| {
        let out = unsafe { as_mut(all_passed, "all_passed")? };
        let report = run_lemma_checks((iterations > 0).then_some(iterations), (tol > 0.0).then_some(tol), seed)?;
        *out = report.all_passed();
        Ok(())
    })
}
