//! C interface to `trainrec`.
//!
//! Objects cross the boundary as opaque handles that the caller frees with
//! the matching `*_free` function. Every fallible call returns a
//! [`TrainrecStatus`]; on failure a description is available from
//! [`trainrec_last_error`] on the same thread. Strings returned by the
//! library are freed with [`trainrec_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use trainrec::error::Stage;
use trainrec::metrics;
use trainrec::pipeline::{self, ReconstructOptions};
use trainrec::sampler::{sample_cloud, NoiseModel, NoiseProfile, PointCloud};
use trainrec::signal::{make_chirp_like, PeriodicSignal};
use trainrec::solver::{Orientation, ReconstructionResult};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainrecStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidUtf8 = 3,
    Parse = 4,
    CurveFailed = 5,
    DensityFailed = 6,
    OffsetFailed = 7,
    AssemblyFailed = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainrecNoise {
    Gaussian = 0,
    UniformBall = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainrecOrientation {
    Forward = 0,
    Reversed = 1,
}

/// Reconstruction tuning. Start from [`trainrec_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TrainrecOptions {
    pub warp_grid: usize,
    pub scan_points: usize,
    pub quadrature_points: usize,
    pub output_resolution: usize,
    pub min_points: usize,
    pub denoise_iterations: usize,
    pub max_improvement_passes: usize,
}

impl From<ReconstructOptions> for TrainrecOptions {
    fn from(o: ReconstructOptions) -> Self {
        Self {
            warp_grid: o.warp_grid,
            scan_points: o.scan_points,
            quadrature_points: o.quadrature_points,
            output_resolution: o.output_resolution,
            min_points: o.min_points,
            denoise_iterations: o.denoise_iterations,
            max_improvement_passes: o.max_improvement_passes,
        }
    }
}

impl From<TrainrecOptions> for ReconstructOptions {
    fn from(o: TrainrecOptions) -> Self {
        Self {
            warp_grid: o.warp_grid,
            scan_points: o.scan_points,
            quadrature_points: o.quadrature_points,
            output_resolution: o.output_resolution,
            min_points: o.min_points,
            denoise_iterations: o.denoise_iterations,
            max_improvement_passes: o.max_improvement_passes,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TrainrecErrorReport {
    pub eps_t: f64,
    pub eps_2: f64,
    pub eps_inf: f64,
    pub best_shift: f64,
}

/// A periodic signal.
pub struct TrainrecSignal(PeriodicSignal);

/// A cloud of sample trains.
pub struct TrainrecCloud(PointCloud);

/// A finished reconstruction.
pub struct TrainrecResult(ReconstructionResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(TrainrecStatus, String);

impl Failure {
    fn invalid(msg: impl Into<String>) -> Self {
        Failure(TrainrecStatus::InvalidArgument, msg.into())
    }
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, records any failure and converts panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TrainrecStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            TrainrecStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            TrainrecStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(TrainrecStatus::NullPointer, format!("{what} is null")))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(TrainrecStatus::NullPointer, "output pointer is null".into()));
    }
    out.write(value);
    Ok(())
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(Failure(TrainrecStatus::NullPointer, "string is null".into()));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Failure(TrainrecStatus::InvalidUtf8, e.to_string()))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn trainrec_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library from this thread.
#[no_mangle]
pub extern "C" fn trainrec_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by the library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn trainrec_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn trainrec_options_default() -> TrainrecOptions {
    ReconstructOptions::default().into()
}

/// Parses a signal JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trainrec_signal_from_json(json: *const c_char, out: *mut *mut TrainrecSignal) -> TrainrecStatus {
    guard(|| {
        let text = read_str(json)?;
        let signal = PeriodicSignal::from_json(text).map_err(|e| Failure(TrainrecStatus::Parse, e.to_string()))?;
        write_out(out, boxed(TrainrecSignal(signal)))
    })
}

/// The built-in chirp-like test signal.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trainrec_signal_chirp(period: f64, out: *mut *mut TrainrecSignal) -> TrainrecStatus {
    guard(|| {
        let signal = make_chirp_like(period).map_err(|e| Failure::invalid(e.to_string()))?;
        write_out(out, boxed(TrainrecSignal(signal)))
    })
}

/// `amplitude · sin(2πt/period)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trainrec_signal_sine(period: f64, amplitude: f64, out: *mut *mut TrainrecSignal) -> TrainrecStatus {
    guard(|| {
        let signal = PeriodicSignal::sine(period, amplitude).map_err(|e| Failure::invalid(e.to_string()))?;
        write_out(out, boxed(TrainrecSignal(signal)))
    })
}

/// A signal given by `len` uniform samples over one period.
///
/// # Safety
/// `samples` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trainrec_signal_table(
    period: f64,
    samples: *const f64,
    len: usize,
    out: *mut *mut TrainrecSignal,
) -> TrainrecStatus {
    guard(|| {
        deref(samples, "samples")?;
        let values = std::slice::from_raw_parts(samples, len).to_vec();
        let signal = PeriodicSignal::table(period, values).map_err(|e| Failure::invalid(e.to_string()))?;
        write_out(out, boxed(TrainrecSignal(signal)))
    })
}

/// # Safety
/// `signal` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trainrec_signal_evaluate(signal: *const TrainrecSignal, t: f64, out: *mut f64) -> TrainrecStatus {
    guard(|| write_out(out, deref(signal, "signal")?.0.evaluate(t)))
}

/// # Safety
/// `signal` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trainrec_signal_period(signal: *const TrainrecSignal, out: *mut f64) -> TrainrecStatus {
    guard(|| write_out(out, deref(signal, "signal")?.0.period()))
}

/// Serializes the signal; free the string with [`trainrec_string_free`].
///
/// # Safety
/// `signal` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trainrec_signal_to_json(signal: *const TrainrecSignal, out: *mut *mut c_char) -> TrainrecStatus {
    guard(|| write_out(out, to_c_string(deref(signal, "signal")?.0.to_json())))
}

/// # Safety
/// `signal` must come from this library and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn trainrec_signal_free(signal: *mut TrainrecSignal) {
    if !signal.is_null() {
        drop(Box::from_raw(signal));
    }
}

/// Draws `n` noisy trains of length `d` at spacing `tau`. `delta` is the
/// quantization step, 0 for none.
///
/// # Safety
/// `signal` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trainrec_cloud_sample(
    signal: *const TrainrecSignal,
    tau: f64,
    d: usize,
    n: usize,
    sigma: f64,
    noise: TrainrecNoise,
    delta: f64,
    seed: u64,
    out: *mut *mut TrainrecCloud,
) -> TrainrecStatus {
    guard(|| {
        let signal = &deref(signal, "signal")?.0;
        let profile = match noise {
            TrainrecNoise::Gaussian => NoiseProfile::GaussianIsotropic,
            TrainrecNoise::UniformBall => NoiseProfile::UniformBall,
        };
        let cloud = sample_cloud(signal, tau, d, n, NoiseModel { sigma, profile }, delta, seed)
            .map_err(|e| Failure::invalid(e.to_string()))?;
        write_out(out, boxed(TrainrecCloud(cloud)))
    })
}

/// A cloud from `n` row-major points of dimension `d`.
///
/// # Safety
/// `coords` must point to `n * d` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trainrec_cloud_from_points(
    coords: *const f64,
    n: usize,
    d: usize,
    tau: f64,
    out: *mut *mut TrainrecCloud,
) -> TrainrecStatus {
    guard(|| {
        deref(coords, "coords")?;
        let len = n.checked_mul(d).ok_or_else(|| Failure::invalid("n * d overflows"))?;
        let values = std::slice::from_raw_parts(coords, len).to_vec();
        let cloud = PointCloud::new(d, values, tau).map_err(|e| Failure::invalid(e.to_string()))?;
        write_out(out, boxed(TrainrecCloud(cloud)))
    })
}

/// # Safety
/// `cloud` must be a live handle; `n` and `d` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trainrec_cloud_shape(cloud: *const TrainrecCloud, n: *mut usize, d: *mut usize) -> TrainrecStatus {
    guard(|| {
        let cloud = &deref(cloud, "cloud")?.0;
        write_out(n, cloud.len())?;
        write_out(d, cloud.dim())
    })
}

/// Copies the row-major coordinates into `buf`, which must hold `n * d` values.
///
/// # Safety
/// `cloud` must be a live handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn trainrec_cloud_coords(cloud: *const TrainrecCloud, buf: *mut f64, len: usize) -> TrainrecStatus {
    guard(|| {
        let coords = deref(cloud, "cloud")?.0.coords();
        copy_into(coords, buf, len)
    })
}

unsafe fn copy_into(values: &[f64], buf: *mut f64, len: usize) -> Result<(), Failure> {
    if buf.is_null() {
        return Err(Failure(TrainrecStatus::NullPointer, "buffer is null".into()));
    }
    if len < values.len() {
        return Err(Failure(
            TrainrecStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", values.len()),
        ));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    Ok(())
}

/// # Safety
/// `cloud` must come from this library and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn trainrec_cloud_free(cloud: *mut TrainrecCloud) {
    if !cloud.is_null() {
        drop(Box::from_raw(cloud));
    }
}

/// Reconstructs period and waveform. `options` may be NULL for defaults.
///
/// # Safety
/// `cloud` must be a live handle; `options` NULL or valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn trainrec_reconstruct(
    cloud: *const TrainrecCloud,
    radius: f64,
    options: *const TrainrecOptions,
    out: *mut *mut TrainrecResult,
) -> TrainrecStatus {
    guard(|| {
        let cloud = &deref(cloud, "cloud")?.0;
        let options = options.as_ref().map_or_else(ReconstructOptions::default, |o| (*o).into());
        let result = pipeline::reconstruct(cloud, radius, &options).map_err(|e| {
            let status = match e.stage {
                Stage::Curve => TrainrecStatus::CurveFailed,
                Stage::Density => TrainrecStatus::DensityFailed,
                Stage::Offset => TrainrecStatus::OffsetFailed,
                Stage::Assembly => TrainrecStatus::AssemblyFailed,
            };
            Failure(status, e.to_string())
        })?;
        write_out(out, boxed(TrainrecResult(result)))
    })
}

/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trainrec_result_period(result: *const TrainrecResult, out: *mut f64) -> TrainrecStatus {
    guard(|| write_out(out, deref(result, "result")?.0.period_estimate))
}

/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trainrec_result_offset(result: *const TrainrecResult, out: *mut f64) -> TrainrecStatus {
    guard(|| write_out(out, deref(result, "result")?.0.offset.x0))
}

/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trainrec_result_orientation(
    result: *const TrainrecResult,
    out: *mut TrainrecOrientation,
) -> TrainrecStatus {
    guard(|| {
        let o = match deref(result, "result")?.0.offset.orientation {
            Orientation::Forward => TrainrecOrientation::Forward,
            Orientation::Reversed => TrainrecOrientation::Reversed,
        };
        write_out(out, o)
    })
}

/// A new signal handle holding the reconstructed waveform.
///
/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trainrec_result_signal(
    result: *const TrainrecResult,
    out: *mut *mut TrainrecSignal,
) -> TrainrecStatus {
    guard(|| {
        let signal = deref(result, "result")?.0.signal_estimate.clone();
        write_out(out, boxed(TrainrecSignal(signal)))
    })
}

/// The full result document as JSON; free with [`trainrec_string_free`].
///
/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trainrec_result_to_json(result: *const TrainrecResult, out: *mut *mut c_char) -> TrainrecStatus {
    guard(|| {
        let doc = deref(result, "result")?.0.to_document();
        let text = serde_json::to_string(&doc).map_err(|e| Failure(TrainrecStatus::Parse, e.to_string()))?;
        write_out(out, to_c_string(text))
    })
}

/// # Safety
/// `result` must come from this library and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn trainrec_result_free(result: *mut TrainrecResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Period error and shift-minimized RMS and sup errors of `estimate`
/// against `reference`. `shift_grid` is the size of the shift lattice.
///
/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trainrec_evaluate(
    reference: *const TrainrecSignal,
    estimate: *const TrainrecSignal,
    shift_grid: usize,
    out: *mut TrainrecErrorReport,
) -> TrainrecStatus {
    guard(|| {
        let reference = &deref(reference, "reference")?.0;
        let estimate = &deref(estimate, "estimate")?.0;
        if shift_grid == 0 {
            return Err(Failure::invalid("shift grid must be positive"));
        }
        let r = metrics::evaluate(reference, estimate, shift_grid);
        write_out(
            out,
            TrainrecErrorReport {
                eps_t: r.eps_t,
                eps_2: r.eps_2,
                eps_inf: r.eps_inf,
                best_shift: r.best_shift,
            },
        )
    })
}
