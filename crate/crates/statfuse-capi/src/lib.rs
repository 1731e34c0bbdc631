//! C ABI for the statfuse pan-sharpening library.
//!
//! Objects cross the boundary as opaque handles created and destroyed by
//! this library; every fallible call returns a [`StatfuseStatus`] and
//! leaves a message retrievable with [`statfuse_last_error`] on failure.
//! All functions catch panics and report them as `STATFUSE_STATUS_PANIC`
//! instead of unwinding across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use statfuse::error::Error;
use statfuse::fusion::{self, FusionConfig, FusionMethod};
use statfuse::io::{self, ReportFormat};
use statfuse::metrics::{self, QualityReport};
use statfuse::raster::{degrade, upsample_nearest, Band, ImageStack, ResolutionRatio};
use statfuse::window_stats::WindowSpec;

/// Result codes for every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StatfuseStatus {
    Ok = 0,
    NullPointer,
    InvalidArgument,
    DimensionMismatch,
    ShapeError,
    ParseError,
    RangeError,
    IoError,
    DegenerateInput,
    Panic,
}

/// Fusion method selector.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StatfuseMethod {
    Lmm = 0,
    Lmvm,
    Rvs,
    Lcm,
}

impl From<StatfuseMethod> for FusionMethod {
    fn from(m: StatfuseMethod) -> Self {
        match m {
            StatfuseMethod::Lmm => FusionMethod::Lmm,
            StatfuseMethod::Lmvm => FusionMethod::Lmvm,
            StatfuseMethod::Rvs => FusionMethod::Rvs,
            StatfuseMethod::Lcm => FusionMethod::Lcm,
        }
    }
}

/// Report rendering format.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StatfuseReportFormat {
    Csv = 0,
    Json,
}

/// Fusion parameters; fill with [`statfuse_fusion_options_default`] and
/// adjust fields as needed. Window dimensions must be odd.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct StatfuseFusionOptions {
    pub method: StatfuseMethod,
    /// Integer PAN/MS resolution ratio, at least 1.
    pub ratio: u32,
    pub window_lmm_width: u32,
    pub window_lmm_height: u32,
    pub window_lmvm_width: u32,
    pub window_lmvm_height: u32,
    pub window_rvs_width: u32,
    pub window_rvs_height: u32,
    pub window_lcm_width: u32,
    pub window_lcm_height: u32,
    /// Degeneracy threshold for near-zero denominators.
    pub epsilon: f64,
    /// When true, fused values are clamped to [clamp_lo, clamp_hi].
    pub clamp_enabled: bool,
    pub clamp_lo: f64,
    pub clamp_hi: f64,
}

/// A single image band (opaque).
pub struct StatfuseBand {
    inner: Band,
}

/// An ordered set of equally sized bands (opaque).
pub struct StatfuseStack {
    inner: ImageStack,
}

/// A quality report (opaque); render with [`statfuse_report_render`].
pub struct StatfuseReport {
    inner: QualityReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(e: &Error) -> StatfuseStatus {
    set_last_error(&e.to_string());
    match e {
        Error::Dimension(_) => StatfuseStatus::DimensionMismatch,
        Error::Invalid(_) => StatfuseStatus::InvalidArgument,
        Error::Degenerate(_) => StatfuseStatus::DegenerateInput,
        Error::Parse { .. } => StatfuseStatus::ParseError,
        Error::Range { .. } => StatfuseStatus::RangeError,
        Error::Shape(_) => StatfuseStatus::ShapeError,
        Error::Io { .. } => StatfuseStatus::IoError,
    }
}

fn null_pointer(what: &str) -> StatfuseStatus {
    set_last_error(&format!("{what} is null"));
    StatfuseStatus::NullPointer
}

/// Runs `f` with a panic guard.
fn guarded(f: impl FnOnce() -> StatfuseStatus) -> StatfuseStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("internal panic");
            StatfuseStatus::Panic
        }
    }
}

unsafe fn path_arg(ptr: *const c_char, what: &str) -> Result<PathBuf, StatfuseStatus> {
    if ptr.is_null() {
        return Err(null_pointer(what));
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => {
            set_last_error(&format!("{what} is not valid UTF-8"));
            Err(StatfuseStatus::InvalidArgument)
        }
    }
}

unsafe fn write_out<T>(out: *mut *mut T, value: T, what: &str) -> StatfuseStatus {
    if out.is_null() {
        return null_pointer(what);
    }
    *out = Box::into_raw(Box::new(value));
    StatfuseStatus::Ok
}

/// Copies the most recent error message on this thread into `buffer`
/// (NUL-terminated, truncated to `capacity`). Returns the full message
/// length in bytes excluding the terminator; call with a null buffer to
/// query the required size.
#[no_mangle]
pub unsafe extern "C" fn statfuse_last_error(buffer: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes();
        if !buffer.is_null() && capacity > 0 {
            let n = bytes.len().min(capacity - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buffer, n);
            *buffer.add(n) = 0;
        }
        bytes.len()
    })
}

/// Creates a band from `width * height` row-major samples.
///
/// # Safety
/// `data` must point to `len` readable doubles; `out` must be a valid
/// location for a handle. The returned handle must be released with
/// [`statfuse_band_free`].
#[no_mangle]
pub unsafe extern "C" fn statfuse_band_create(
    width: u32,
    height: u32,
    data: *const f64,
    len: usize,
    bit_depth: u32,
    out: *mut *mut StatfuseBand,
) -> StatfuseStatus {
    guarded(|| {
        if data.is_null() {
            return null_pointer("data");
        }
        let samples = std::slice::from_raw_parts(data, len).to_vec();
        match Band::new(width as usize, height as usize, samples, bit_depth) {
            Ok(band) => write_out(out, StatfuseBand { inner: band }, "out"),
            Err(e) => fail(&e),
        }
    })
}

/// # Safety
/// `band` must be a handle from this library, not yet freed; null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn statfuse_band_free(band: *mut StatfuseBand) {
    if !band.is_null() {
        drop(Box::from_raw(band));
    }
}

/// Width in pixels; 0 when `band` is null.
///
/// # Safety
/// `band` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn statfuse_band_width(band: *const StatfuseBand) -> u32 {
    band.as_ref().map_or(0, |b| b.inner.width() as u32)
}

/// Height in pixels; 0 when `band` is null.
///
/// # Safety
/// `band` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn statfuse_band_height(band: *const StatfuseBand) -> u32 {
    band.as_ref().map_or(0, |b| b.inner.height() as u32)
}

/// Declared sample depth in bits; 0 when `band` is null.
///
/// # Safety
/// `band` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn statfuse_band_bit_depth(band: *const StatfuseBand) -> u32 {
    band.as_ref().map_or(0, |b| b.inner.bit_depth())
}

/// Copies the band's row-major samples into `out`.
///
/// # Safety
/// `out` must point to at least `capacity` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn statfuse_band_copy_data(
    band: *const StatfuseBand,
    out: *mut f64,
    capacity: usize,
) -> StatfuseStatus {
    guarded(|| {
        let Some(band) = band.as_ref() else {
            return null_pointer("band");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        let data = band.inner.data();
        if capacity < data.len() {
            set_last_error(&format!(
                "buffer holds {capacity} samples but the band has {}",
                data.len()
            ));
            return StatfuseStatus::InvalidArgument;
        }
        std::ptr::copy_nonoverlapping(data.as_ptr(), out, data.len());
        StatfuseStatus::Ok
    })
}

/// Builds a stack from `count` band handles (each copied in; the caller
/// keeps ownership of the inputs). Bands must share dimensions.
///
/// # Safety
/// `bands` must point to `count` live band handles.
#[no_mangle]
pub unsafe extern "C" fn statfuse_stack_create(
    bands: *const *const StatfuseBand,
    count: usize,
    out: *mut *mut StatfuseStack,
) -> StatfuseStatus {
    guarded(|| {
        if bands.is_null() {
            return null_pointer("bands");
        }
        let handles = std::slice::from_raw_parts(bands, count);
        let mut owned = Vec::with_capacity(count);
        for (i, handle) in handles.iter().enumerate() {
            match handle.as_ref() {
                Some(b) => owned.push(b.inner.clone()),
                None => return null_pointer(&format!("bands[{i}]")),
            }
        }
        match ImageStack::new(owned) {
            Ok(stack) => write_out(out, StatfuseStack { inner: stack }, "out"),
            Err(e) => fail(&e),
        }
    })
}

/// # Safety
/// `stack` must be a handle from this library, not yet freed; null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn statfuse_stack_free(stack: *mut StatfuseStack) {
    if !stack.is_null() {
        drop(Box::from_raw(stack));
    }
}

/// Number of bands; 0 when `stack` is null.
///
/// # Safety
/// `stack` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn statfuse_stack_band_count(stack: *const StatfuseStack) -> usize {
    stack.as_ref().map_or(0, |s| s.inner.band_count())
}

/// Copies band `index` out of the stack into a fresh band handle.
///
/// # Safety
/// `stack` must be a live handle; `out` a valid handle location.
#[no_mangle]
pub unsafe extern "C" fn statfuse_stack_band(
    stack: *const StatfuseStack,
    index: usize,
    out: *mut *mut StatfuseBand,
) -> StatfuseStatus {
    guarded(|| {
        let Some(stack) = stack.as_ref() else {
            return null_pointer("stack");
        };
        if index >= stack.inner.band_count() {
            set_last_error(&format!(
                "band index {index} out of range for {} bands",
                stack.inner.band_count()
            ));
            return StatfuseStatus::InvalidArgument;
        }
        let band = stack.inner.band(index).clone();
        write_out(out, StatfuseBand { inner: band }, "out")
    })
}

/// Reads a PGM or PPM file into a new stack handle.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` a valid handle location.
#[no_mangle]
pub unsafe extern "C" fn statfuse_read_image(
    path: *const c_char,
    out: *mut *mut StatfuseStack,
) -> StatfuseStatus {
    guarded(|| {
        let path = match path_arg(path, "path") {
            Ok(p) => p,
            Err(status) => return status,
        };
        match io::read_image(path) {
            Ok(stack) => write_out(out, StatfuseStack { inner: stack }, "out"),
            Err(e) => fail(&e),
        }
    })
}

/// Writes a stack as binary PGM (1 band) or PPM (3 bands).
///
/// # Safety
/// `stack` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn statfuse_write_image(
    stack: *const StatfuseStack,
    path: *const c_char,
    maxval: u32,
) -> StatfuseStatus {
    guarded(|| {
        let Some(stack) = stack.as_ref() else {
            return null_pointer("stack");
        };
        let path = match path_arg(path, "path") {
            Ok(p) => p,
            Err(status) => return status,
        };
        match io::write_image(&stack.inner, path, maxval) {
            Ok(()) => StatfuseStatus::Ok,
            Err(e) => fail(&e),
        }
    })
}

/// Default fusion options for a method: 11x11 windows (5x5 for RVS),
/// epsilon 1e-12, clamping off.
#[no_mangle]
pub extern "C" fn statfuse_fusion_options_default(
    method: StatfuseMethod,
    ratio: u32,
) -> StatfuseFusionOptions {
    StatfuseFusionOptions {
        method,
        ratio,
        window_lmm_width: 11,
        window_lmm_height: 11,
        window_lmvm_width: 11,
        window_lmvm_height: 11,
        window_rvs_width: 5,
        window_rvs_height: 5,
        window_lcm_width: 11,
        window_lcm_height: 11,
        epsilon: WindowSpec::DEFAULT_EPSILON,
        clamp_enabled: false,
        clamp_lo: 0.0,
        clamp_hi: 0.0,
    }
}

fn window(width: u32, height: u32, epsilon: f64) -> Result<WindowSpec, Error> {
    WindowSpec::new(width as usize, height as usize)?.with_epsilon(epsilon)
}

fn config_from(options: &StatfuseFusionOptions) -> Result<FusionConfig, Error> {
    let mut cfg = FusionConfig::new(options.method.into(), ResolutionRatio::new(options.ratio)?);
    cfg.window_lmm = window(options.window_lmm_width, options.window_lmm_height, options.epsilon)?;
    cfg.window_lmvm = window(
        options.window_lmvm_width,
        options.window_lmvm_height,
        options.epsilon,
    )?;
    cfg.window_rvs = window(options.window_rvs_width, options.window_rvs_height, options.epsilon)?;
    cfg.window_lcm = window(options.window_lcm_width, options.window_lcm_height, options.epsilon)?;
    if options.clamp_enabled {
        if !options.clamp_lo.is_finite()
            || !options.clamp_hi.is_finite()
            || options.clamp_lo > options.clamp_hi
        {
            return Err(Error::Invalid(format!(
                "clamp bounds must be finite with lo <= hi, got {}:{}",
                options.clamp_lo, options.clamp_hi
            )));
        }
        cfg.clamp = Some((options.clamp_lo, options.clamp_hi));
    }
    Ok(cfg)
}

/// Fuses every MS band with the PAN band, producing a stack of fused bands
/// at PAN resolution (band order preserved).
///
/// # Safety
/// `pan`, `ms` must be live handles; `options` readable; `out` a valid
/// handle location.
#[no_mangle]
pub unsafe extern "C" fn statfuse_fuse(
    pan: *const StatfuseBand,
    ms: *const StatfuseStack,
    options: *const StatfuseFusionOptions,
    out: *mut *mut StatfuseStack,
) -> StatfuseStatus {
    guarded(|| {
        let Some(pan) = pan.as_ref() else {
            return null_pointer("pan");
        };
        let Some(ms) = ms.as_ref() else {
            return null_pointer("ms");
        };
        let Some(options) = options.as_ref() else {
            return null_pointer("options");
        };
        let cfg = match config_from(options) {
            Ok(cfg) => cfg,
            Err(e) => return fail(&e),
        };
        let fused = match fusion::fuse_stack(&pan.inner, &ms.inner, &cfg) {
            Ok(fused) => fused,
            Err(e) => return fail(&e),
        };
        let bands = fused.into_iter().map(|f| f.band).collect();
        match ImageStack::new(bands) {
            Ok(stack) => write_out(out, StatfuseStack { inner: stack }, "out"),
            Err(e) => fail(&e),
        }
    })
}

/// Replicates every pixel into a `factor x factor` block.
///
/// # Safety
/// `band` must be a live handle; `out` a valid handle location.
#[no_mangle]
pub unsafe extern "C" fn statfuse_upsample_nearest(
    band: *const StatfuseBand,
    factor: u32,
    out: *mut *mut StatfuseBand,
) -> StatfuseStatus {
    guarded(|| {
        let Some(band) = band.as_ref() else {
            return null_pointer("band");
        };
        let ratio = match ResolutionRatio::new(factor) {
            Ok(r) => r,
            Err(e) => return fail(&e),
        };
        let up = upsample_nearest(&band.inner, ratio);
        write_out(out, StatfuseBand { inner: up }, "out")
    })
}

/// Box-blurs and decimates by `factor`; dimensions must divide evenly.
///
/// # Safety
/// `band` must be a live handle; `out` a valid handle location.
#[no_mangle]
pub unsafe extern "C" fn statfuse_degrade(
    band: *const StatfuseBand,
    factor: u32,
    out: *mut *mut StatfuseBand,
) -> StatfuseStatus {
    guarded(|| {
        let Some(band) = band.as_ref() else {
            return null_pointer("band");
        };
        let ratio = match ResolutionRatio::new(factor) {
            Ok(r) => r,
            Err(e) => return fail(&e),
        };
        match degrade(&band.inner, ratio) {
            Ok(down) => write_out(out, StatfuseBand { inner: down }, "out"),
            Err(e) => fail(&e),
        }
    })
}

unsafe fn metric_pair(
    f: *const StatfuseBand,
    m: *const StatfuseBand,
    out: *mut f64,
    eval: impl FnOnce(&Band, &Band) -> Result<f64, Error>,
) -> StatfuseStatus {
    let Some(f) = f.as_ref() else {
        return null_pointer("fused band");
    };
    let Some(m) = m.as_ref() else {
        return null_pointer("reference band");
    };
    if out.is_null() {
        return null_pointer("out");
    }
    match eval(&f.inner, &m.inner) {
        Ok(v) => {
            *out = v;
            StatfuseStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Population standard deviation of all samples.
///
/// # Safety
/// `band` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn statfuse_std_dev(
    band: *const StatfuseBand,
    out: *mut f64,
) -> StatfuseStatus {
    guarded(|| {
        let Some(band) = band.as_ref() else {
            return null_pointer("band");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        *out = metrics::std_dev(&band.inner);
        StatfuseStatus::Ok
    })
}

/// Shannon entropy in bits over `levels` quantisation levels (at least 2).
///
/// # Safety
/// `band` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn statfuse_entropy(
    band: *const StatfuseBand,
    levels: u32,
    out: *mut f64,
) -> StatfuseStatus {
    guarded(|| {
        let Some(band) = band.as_ref() else {
            return null_pointer("band");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        if levels < 2 {
            set_last_error(&format!("entropy needs at least 2 levels, got {levels}"));
            return StatfuseStatus::InvalidArgument;
        }
        *out = metrics::entropy(&band.inner, levels);
        StatfuseStatus::Ok
    })
}

/// Pearson correlation coefficient.
///
/// # Safety
/// Both bands must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn statfuse_correlation(
    f: *const StatfuseBand,
    m: *const StatfuseBand,
    out: *mut f64,
) -> StatfuseStatus {
    guarded(|| metric_pair(f, m, out, metrics::correlation))
}

/// Signal-to-noise ratio (fused energy over squared error).
///
/// # Safety
/// Both bands must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn statfuse_snr(
    f: *const StatfuseBand,
    m: *const StatfuseBand,
    out: *mut f64,
) -> StatfuseStatus {
    guarded(|| metric_pair(f, m, out, metrics::snr))
}

/// Root-mean-square error normalised by a 255 full scale.
///
/// # Safety
/// Both bands must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn statfuse_nrmse(
    f: *const StatfuseBand,
    m: *const StatfuseBand,
    out: *mut f64,
) -> StatfuseStatus {
    guarded(|| metric_pair(f, m, out, metrics::nrmse))
}

/// Mean absolute relative deviation from the reference.
///
/// # Safety
/// Both bands must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn statfuse_deviation_index(
    f: *const StatfuseBand,
    m: *const StatfuseBand,
    out: *mut f64,
) -> StatfuseStatus {
    guarded(|| metric_pair(f, m, out, metrics::deviation_index))
}

/// Scores a fused stack against a reference stack (band counts must
/// match), producing a report handle with ORIGIN rows first.
///
/// # Safety
/// `fused` and `reference` must be live handles; `label` a NUL-terminated
/// string; `out` a valid handle location.
#[no_mangle]
pub unsafe extern "C" fn statfuse_evaluate(
    fused: *const StatfuseStack,
    label: *const c_char,
    reference: *const StatfuseStack,
    levels: u32,
    out: *mut *mut StatfuseReport,
) -> StatfuseStatus {
    guarded(|| {
        let Some(fused) = fused.as_ref() else {
            return null_pointer("fused");
        };
        let Some(reference) = reference.as_ref() else {
            return null_pointer("reference");
        };
        let label = if label.is_null() {
            "FUSED".to_string()
        } else {
            match CStr::from_ptr(label).to_str() {
                Ok(s) => s.to_string(),
                Err(_) => {
                    set_last_error("label is not valid UTF-8");
                    return StatfuseStatus::InvalidArgument;
                }
            }
        };
        if levels < 2 {
            set_last_error(&format!("entropy needs at least 2 levels, got {levels}"));
            return StatfuseStatus::InvalidArgument;
        }
        match metrics::evaluate_labeled(&label, &fused.inner, &reference.inner, levels) {
            Ok(report) => write_out(out, StatfuseReport { inner: report }, "out"),
            Err(e) => fail(&e),
        }
    })
}

/// # Safety
/// `report` must be a handle from this library, not yet freed; null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn statfuse_report_free(report: *mut StatfuseReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Renders a report as CSV or JSON into a NUL-terminated string owned by
/// this library; release it with [`statfuse_string_free`].
///
/// # Safety
/// `report` must be a live handle; `out` a valid string location.
#[no_mangle]
pub unsafe extern "C" fn statfuse_report_render(
    report: *const StatfuseReport,
    format: StatfuseReportFormat,
    out: *mut *mut c_char,
) -> StatfuseStatus {
    guarded(|| {
        let Some(report) = report.as_ref() else {
            return null_pointer("report");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        let text = match format {
            StatfuseReportFormat::Csv => io::render_report_csv(&report.inner),
            StatfuseReportFormat::Json => io::render_report_json(&report.inner),
        };
        match CString::new(text) {
            Ok(s) => {
                *out = s.into_raw();
                StatfuseStatus::Ok
            }
            Err(_) => {
                set_last_error("report text contains an interior NUL");
                StatfuseStatus::InvalidArgument
            }
        }
    })
}

/// Writes a report to a file as CSV or JSON.
///
/// # Safety
/// `report` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn statfuse_write_report(
    report: *const StatfuseReport,
    path: *const c_char,
    format: StatfuseReportFormat,
) -> StatfuseStatus {
    guarded(|| {
        let Some(report) = report.as_ref() else {
            return null_pointer("report");
        };
        let path = match path_arg(path, "path") {
            Ok(p) => p,
            Err(status) => return status,
        };
        let fmt = match format {
            StatfuseReportFormat::Csv => ReportFormat::Csv,
            StatfuseReportFormat::Json => ReportFormat::Json,
        };
        match io::write_report(&report.inner, path, fmt) {
            Ok(()) => StatfuseStatus::Ok,
            Err(e) => fail(&e),
        }
    })
}

/// Releases a string returned by [`statfuse_report_render`].
///
/// # Safety
/// `s` must come from this library and not have been freed; null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn statfuse_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
