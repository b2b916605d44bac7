//! C interface to the stereo-decorr toolkit.
//!
//! Every function returns an [`SdStatus`]; on failure a description is
//! available from [`sd_last_error`] on the same thread. Processors are
//! opaque [`SdDecorrelator`] handles created by `sd_decorrelator_new_*` and
//! released with [`sd_decorrelator_free`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use stereo_decorr::analysis::{band_average_coherence, coherence, misalignment_db};
use stereo_decorr::decorrelators::{check_stability, Decorrelator, DecorrelatorConfig, ScalConfig};
use stereo_decorr::psynoise::NoiseInjectorConfig;
use stereo_decorr::windows::WindowSpec;
use stereo_decorr::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidConfig = 2,
    Io = 3,
    Numeric = 4,
    InsufficientData = 5,
    Panic = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> SdStatus {
    match err {
        Error::InsufficientData { .. } => SdStatus::InsufficientData,
        _ => match err.exit_code() {
            2 => SdStatus::InvalidConfig,
            3 => SdStatus::Io,
            _ => SdStatus::Numeric,
        },
    }
}

fn guard(f: impl FnOnce() -> Result<(), SdStatus>) -> SdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SdStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic");
            SdStatus::Panic
        }
    }
}

fn fail(err: Error) -> SdStatus {
    set_error(err.to_string());
    status_of(&err)
}

fn null(what: &str) -> SdStatus {
    set_error(format!("{what} is null"));
    SdStatus::NullPointer
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn sd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// SCAL parameters. Obtain defaults from [`sd_scal_default_params`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SdScalParams {
    pub beta: f64,
    pub n_min: u32,
    pub n_max: u32,
    pub r_max: f64,
    pub epsilon: f64,
    pub window_length: u32,
    /// Nonzero to follow the filter with masked-noise injection.
    pub with_noise: c_int,
}

#[no_mangle]
pub extern "C" fn sd_scal_default_params() -> SdScalParams {
    let d = ScalConfig::default();
    SdScalParams {
        beta: d.beta,
        n_min: d.n_min as u32,
        n_max: d.n_max as u32,
        r_max: d.r_max,
        epsilon: d.epsilon,
        window_length: d.window.length as u32,
        with_noise: 1,
    }
}

/// Streaming single-channel processor.
pub struct SdDecorrelator {
    inner: Box<dyn Decorrelator>,
    input: Vec<f64>,
    output: Vec<f64>,
}

fn make_handle(cfg: &DecorrelatorConfig, sample_rate: u32, seed: u64, channel: u32, out: *mut *mut SdDecorrelator) -> SdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = cfg.build(sample_rate, seed, channel as usize).map_err(fail)?;
        let handle = Box::new(SdDecorrelator { inner, input: Vec::new(), output: Vec::new() });
        // SAFETY: `out` is non-null and the caller provides a writable slot.
        unsafe { *out = Box::into_raw(handle) };
        Ok(())
    })
}

/// Creates a SCAL processor for channel `channel` of a stream seeded with
/// `seed`.
///
/// # Safety
/// `params` must point to a valid [`SdScalParams`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_decorrelator_new_scal(
    params: *const SdScalParams,
    sample_rate: u32,
    seed: u64,
    channel: u32,
    out: *mut *mut SdDecorrelator,
) -> SdStatus {
    if params.is_null() {
        return guard(|| Err(null("params")));
    }
    let p = *params;
    let window = WindowSpec { length: p.window_length as usize, ..WindowSpec::default() };
    let scal = ScalConfig {
        beta: p.beta,
        n_min: p.n_min as usize,
        n_max: p.n_max as usize,
        r_max: p.r_max,
        epsilon: p.epsilon,
        window,
        ..ScalConfig::default()
    };
    let noise = (p.with_noise != 0).then(|| NoiseInjectorConfig { window, ..NoiseInjectorConfig::default() });
    make_handle(&DecorrelatorConfig::Scal { scal, noise }, sample_rate, seed, channel, out)
}

/// Creates any processor from its JSON description (the `method`-tagged
/// format accepted by the command-line tool).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_decorrelator_new_from_json(
    json: *const c_char,
    sample_rate: u32,
    seed: u64,
    channel: u32,
    out: *mut *mut SdDecorrelator,
) -> SdStatus {
    if json.is_null() {
        return guard(|| Err(null("json")));
    }
    let parsed = CStr::from_ptr(json)
        .to_str()
        .map_err(|e| Error::Config(format!("config is not UTF-8: {e}")))
        .and_then(|s| serde_json::from_str::<DecorrelatorConfig>(s).map_err(Error::from));
    match parsed {
        Ok(cfg) => make_handle(&cfg, sample_rate, seed, channel, out),
        Err(e) => guard(|| Err(fail(e))),
    }
}

/// Processes `len` samples. `input` and `output` may be the same buffer.
///
/// # Safety
/// `handle` must come from `sd_decorrelator_new_*`; both buffers must hold
/// `len` floats.
#[no_mangle]
pub unsafe extern "C" fn sd_decorrelator_process(
    handle: *mut SdDecorrelator,
    input: *const f32,
    output: *mut f32,
    len: usize,
) -> SdStatus {
    guard(|| {
        let h = handle.as_mut().ok_or_else(|| null("handle"))?;
        if len == 0 {
            return Ok(());
        }
        if input.is_null() || output.is_null() {
            return Err(null("buffer"));
        }
        h.input.clear();
        h.input.extend(std::slice::from_raw_parts(input, len).iter().map(|&v| v as f64));
        h.output.resize(len, 0.0);
        h.inner.process(&h.input, &mut h.output).map_err(fail)?;
        let out = std::slice::from_raw_parts_mut(output, len);
        for (o, &v) in out.iter_mut().zip(&h.output) {
            *o = v as f32;
        }
        Ok(())
    })
}

/// Double-precision variant of [`sd_decorrelator_process`]. The buffers
/// must not overlap.
///
/// # Safety
/// As for [`sd_decorrelator_process`].
#[no_mangle]
pub unsafe extern "C" fn sd_decorrelator_process_f64(
    handle: *mut SdDecorrelator,
    input: *const f64,
    output: *mut f64,
    len: usize,
) -> SdStatus {
    guard(|| {
        let h = handle.as_mut().ok_or_else(|| null("handle"))?;
        if len == 0 {
            return Ok(());
        }
        if input.is_null() || output.is_null() {
            return Err(null("buffer"));
        }
        let x = std::slice::from_raw_parts(input, len);
        let y = std::slice::from_raw_parts_mut(output, len);
        h.inner.process(x, y).map_err(fail)
    })
}

/// Nominal delay of the processor in samples; 0 for a null handle.
///
/// # Safety
/// `handle` must be null or come from `sd_decorrelator_new_*`.
#[no_mangle]
pub unsafe extern "C" fn sd_decorrelator_latency(handle: *const SdDecorrelator) -> u32 {
    handle.as_ref().map_or(0, |h| h.inner.latency() as u32)
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `handle` must be null or come from `sd_decorrelator_new_*`, and must not
/// be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sd_decorrelator_free(handle: *mut SdDecorrelator) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Squared coherence of two signals, `fft_size / 2 + 1` bins written to
/// `gamma_sq`. `n_blocks_out` (may be null) receives the number of
/// averaged blocks.
///
/// # Safety
/// `x1` and `x2` must hold `len` doubles; `gamma_sq` must hold `gamma_len`.
#[no_mangle]
pub unsafe extern "C" fn sd_coherence(
    x1: *const f64,
    x2: *const f64,
    len: usize,
    sample_rate: u32,
    fft_size: u32,
    gamma_sq: *mut f64,
    gamma_len: usize,
    n_blocks_out: *mut u32,
) -> SdStatus {
    guard(|| {
        if x1.is_null() || x2.is_null() || gamma_sq.is_null() {
            return Err(null("buffer"));
        }
        let bins = fft_size as usize / 2 + 1;
        if gamma_len != bins {
            return Err(fail(Error::Config(format!("gamma_sq must hold {bins} bins, got {gamma_len}"))));
        }
        let a = std::slice::from_raw_parts(x1, len);
        let b = std::slice::from_raw_parts(x2, len);
        let spec = coherence(a, b, sample_rate, fft_size as usize, None).map_err(fail)?;
        std::slice::from_raw_parts_mut(gamma_sq, gamma_len).copy_from_slice(&spec.gamma_sq);
        if !n_blocks_out.is_null() {
            *n_blocks_out = spec.n_blocks_averaged as u32;
        }
        Ok(())
    })
}

/// Mean squared coherence between `f_lo` and `f_hi` Hz.
///
/// # Safety
/// `x1` and `x2` must hold `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_band_coherence(
    x1: *const f64,
    x2: *const f64,
    len: usize,
    sample_rate: u32,
    fft_size: u32,
    f_lo: f64,
    f_hi: f64,
    out: *mut f64,
) -> SdStatus {
    guard(|| {
        if x1.is_null() || x2.is_null() || out.is_null() {
            return Err(null("buffer"));
        }
        let a = std::slice::from_raw_parts(x1, len);
        let b = std::slice::from_raw_parts(x2, len);
        let spec = coherence(a, b, sample_rate, fft_size as usize, None).map_err(fail)?;
        *out = band_average_coherence(&spec, f_lo, f_hi).map_err(fail)?;
        Ok(())
    })
}

/// Normalized misalignment in dB between a true and an estimated response.
///
/// # Safety
/// `h_true` and `h_est` must hold `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_misalignment_db(h_true: *const f64, h_est: *const f64, len: usize, out: *mut f64) -> SdStatus {
    guard(|| {
        if h_true.is_null() || h_est.is_null() || out.is_null() {
            return Err(null("buffer"));
        }
        let t = std::slice::from_raw_parts(h_true, len);
        let e = std::slice::from_raw_parts(h_est, len);
        *out = misalignment_db(t, e).map_err(fail)?;
        Ok(())
    })
}

/// 1 if `|alpha|(1 + |beta|) < 1`, else 0.
#[no_mangle]
pub extern "C" fn sd_check_stability(alpha: f64, beta: f64) -> c_int {
    check_stability(alpha, beta) as c_int
}
