//! The four statistical fusion methods.
//!
//! Each method maps a PAN band and one MS band to a fused band at PAN
//! resolution. LMM, LMVM and RVS consume an MS band already resampled to
//! PAN size; LCM consumes the original low-resolution MS band and degrades
//! the PAN internally.

use crate::error::{Error, Result};
use crate::raster::{check_alignment, degrade, upsample_nearest, Band, ImageStack, ResolutionRatio};
use crate::window_stats::{local_mean, local_regression, local_std, WindowSpec};

/// The fusion method families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FusionMethod {
    /// Local mean matching: scale PAN by the ratio of local means.
    Lmm,
    /// Local mean and variance matching.
    Lmvm,
    /// Regression variable substitution: sliding-window least squares.
    Rvs,
    /// Local correlation modelling: regression at degraded resolution,
    /// coefficients and residuals re-applied at full resolution.
    Lcm,
}

impl FusionMethod {
    pub const ALL: [FusionMethod; 4] = [
        FusionMethod::Lmm,
        FusionMethod::Lmvm,
        FusionMethod::Rvs,
        FusionMethod::Lcm,
    ];

    /// Upper-case label used in reports.
    pub fn label(&self) -> &'static str {
        match self {
            FusionMethod::Lmm => "LMM",
            FusionMethod::Lmvm => "LMVM",
            FusionMethod::Rvs => "RVS",
            FusionMethod::Lcm => "LCM",
        }
    }
}

impl std::fmt::Display for FusionMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for FusionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lmm" => Ok(FusionMethod::Lmm),
            "lmvm" => Ok(FusionMethod::Lmvm),
            "rvs" => Ok(FusionMethod::Rvs),
            "lcm" => Ok(FusionMethod::Lcm),
            other => Err(Error::Invalid(format!(
                "unknown fusion method '{other}' (expected lmm, lmvm, rvs or lcm)"
            ))),
        }
    }
}

/// Method selection, per-method window sizes, resolution ratio and output
/// clamping policy.
///
/// The default windows are 11x11 for LMM, LMVM and LCM and 5x5 for RVS.
/// Clamping is off by default; fused DN values may exceed the input range,
/// and metric evaluation expects the unclipped values.
#[derive(Clone, Debug)]
pub struct FusionConfig {
    pub method: FusionMethod,
    pub window_lmm: WindowSpec,
    pub window_lmvm: WindowSpec,
    pub window_rvs: WindowSpec,
    pub window_lcm: WindowSpec,
    pub ratio: ResolutionRatio,
    /// Inclusive output range `[lo, hi]`; `None` leaves values unclipped.
    pub clamp: Option<(f64, f64)>,
}

impl FusionConfig {
    pub fn new(method: FusionMethod, ratio: ResolutionRatio) -> Self {
        Self {
            method,
            window_lmm: WindowSpec::square(11).unwrap(),
            window_lmvm: WindowSpec::square(11).unwrap(),
            window_rvs: WindowSpec::square(5).unwrap(),
            window_lcm: WindowSpec::square(11).unwrap(),
            ratio,
            clamp: None,
        }
    }

    /// Applies `epsilon` to all four window specs.
    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.window_lmm = self.window_lmm.with_epsilon(epsilon)?;
        self.window_lmvm = self.window_lmvm.with_epsilon(epsilon)?;
        self.window_rvs = self.window_rvs.with_epsilon(epsilon)?;
        self.window_lcm = self.window_lcm.with_epsilon(epsilon)?;
        Ok(self)
    }

    /// The window spec the configured method uses.
    pub fn window_for(&self, method: FusionMethod) -> &WindowSpec {
        match method {
            FusionMethod::Lmm => &self.window_lmm,
            FusionMethod::Lmvm => &self.window_lmvm,
            FusionMethod::Rvs => &self.window_rvs,
            FusionMethod::Lcm => &self.window_lcm,
        }
    }
}

/// A fused band together with its method and source band index.
#[derive(Clone, Debug)]
pub struct FusedBand {
    pub band: Band,
    pub method: FusionMethod,
    pub source_band: usize,
}

fn apply_clamp(data: &mut [f64], clamp: Option<(f64, f64)>) {
    if let Some((lo, hi)) = clamp {
        debug_assert!(lo <= hi);
        for v in data {
            *v = v.clamp(lo, hi);
        }
    }
}

fn fused(band: Band, method: FusionMethod) -> FusedBand {
    FusedBand {
        band,
        method,
        source_band: 0,
    }
}

/// Local mean matching: `F = P * mean(M) / mean(P)` per pixel.
///
/// Windows whose PAN local mean has magnitude below epsilon (or exactly
/// zero) fall back to the MS local mean.
pub fn fuse_lmm(pan: &Band, ms: &Band, cfg: &FusionConfig) -> Result<FusedBand> {
    same_dims(pan, ms)?;
    let win = &cfg.window_lmm;
    let eps = win.epsilon();
    let mean_m = local_mean(ms, win);
    let mean_p = local_mean(pan, win);
    let data: Vec<f64> = pan
        .data()
        .iter()
        .zip(mean_m.data().iter().zip(mean_p.data()))
        .map(|(&p, (&mm, &mp))| {
            if mp.abs() < eps || mp == 0.0 {
                mm
            } else {
                p * (mm / mp)
            }
        })
        .collect();
    let mut data = data;
    apply_clamp(&mut data, cfg.clamp);
    Ok(fused(
        Band::new(pan.width(), pan.height(), data, ms.bit_depth())?,
        FusionMethod::Lmm,
    ))
}

/// Local mean and variance matching:
/// `F = (P - mean(P)) * std(M) / std(P) + mean(M)` per pixel.
///
/// Windows whose PAN standard deviation falls below epsilon (or is exactly
/// zero) fall back to the MS local mean.
pub fn fuse_lmvm(pan: &Band, ms: &Band, cfg: &FusionConfig) -> Result<FusedBand> {
    same_dims(pan, ms)?;
    let win = &cfg.window_lmvm;
    let eps = win.epsilon();
    let mean_m = local_mean(ms, win);
    let mean_p = local_mean(pan, win);
    let std_m = local_std(ms, win);
    let std_p = local_std(pan, win);
    let mut data = Vec::with_capacity(pan.data().len());
    for i in 0..pan.data().len() {
        let sp = std_p.data()[i];
        let mm = mean_m.data()[i];
        if sp < eps || sp == 0.0 {
            data.push(mm);
        } else {
            let p = pan.data()[i];
            let mp = mean_p.data()[i];
            data.push((p - mp) * (std_m.data()[i] / sp) + mm);
        }
    }
    apply_clamp(&mut data, cfg.clamp);
    Ok(fused(
        Band::new(pan.width(), pan.height(), data, ms.bit_depth())?,
        FusionMethod::Lmvm,
    ))
}

/// Regression variable substitution: per-pixel sliding-window least-squares
/// fit of MS on PAN, applied to PAN.
pub fn fuse_rvs(pan: &Band, ms: &Band, cfg: &FusionConfig) -> Result<FusedBand> {
    same_dims(pan, ms)?;
    let reg = local_regression(ms, pan, &cfg.window_rvs)?;
    let mut data: Vec<f64> = pan
        .data()
        .iter()
        .zip(reg.slope.data().iter().zip(reg.intercept.data()))
        .map(|(&p, (&b, &a))| a + b * p)
        .collect();
    apply_clamp(&mut data, cfg.clamp);
    Ok(fused(
        Band::new(pan.width(), pan.height(), data, ms.bit_depth())?,
        FusionMethod::Rvs,
    ))
}

/// Local correlation modelling.
///
/// The PAN band is degraded to MS resolution, a sliding-window regression
/// of the low-resolution MS on the degraded PAN yields per-pixel
/// coefficients and residuals, and each low-resolution pixel's coefficients
/// and residual are applied uniformly to its `ratio x ratio` block of the
/// original PAN.
pub fn fuse_lcm(pan: &Band, ms_low: &Band, cfg: &FusionConfig) -> Result<FusedBand> {
    let r = cfg.ratio.factor() as usize;
    if pan.width() != ms_low.width() * r || pan.height() != ms_low.height() * r {
        return Err(Error::Dimension(format!(
            "pan {}x{} is not ms {}x{} times ratio {r}",
            pan.width(),
            pan.height(),
            ms_low.width(),
            ms_low.height()
        )));
    }
    let p_low = degrade(pan, cfg.ratio)?;
    let reg = local_regression(ms_low, &p_low, &cfg.window_lcm)?;
    // Model value at low resolution; the residual is ms_low - model_low.
    let model_low: Vec<f64> = p_low
        .data()
        .iter()
        .zip(reg.slope.data().iter().zip(reg.intercept.data()))
        .map(|(&p, (&a, &b))| b + a * p)
        .collect();
    let (pw, ph) = pan.dimensions();
    let lw = ms_low.width();
    let mut data = Vec::with_capacity(pw * ph);
    for hy in 0..ph {
        let ly = hy / r;
        for hx in 0..pw {
            let lx = hx / r;
            let li = ly * lw + lx;
            let model_high = reg.intercept.data()[li] + reg.slope.data()[li] * pan.get(hx, hy);
            // Grouped as M + (model_high - model_low) so the ratio-1 case,
            // where the two models coincide bitwise, telescopes exactly.
            data.push(ms_low.data()[li] + (model_high - model_low[li]));
        }
    }
    apply_clamp(&mut data, cfg.clamp);
    Ok(fused(
        Band::new(pw, ph, data, ms_low.bit_depth())?,
        FusionMethod::Lcm,
    ))
}

/// Applies the configured method band by band.
///
/// LMM, LMVM and RVS get the MS bands nearest-neighbour upsampled first;
/// LCM consumes the original low-resolution bands.
pub fn fuse_stack(pan: &Band, ms: &ImageStack, cfg: &FusionConfig) -> Result<Vec<FusedBand>> {
    let verdict = check_alignment(pan, ms, cfg.ratio);
    if !verdict.is_aligned() {
        return Err(Error::Dimension(verdict.to_string()));
    }
    let mut out = Vec::with_capacity(ms.band_count());
    for (k, band) in ms.bands().iter().enumerate() {
        let mut f = match cfg.method {
            FusionMethod::Lmm => fuse_lmm(pan, &upsample_nearest(band, cfg.ratio), cfg)?,
            FusionMethod::Lmvm => fuse_lmvm(pan, &upsample_nearest(band, cfg.ratio), cfg)?,
            FusionMethod::Rvs => fuse_rvs(pan, &upsample_nearest(band, cfg.ratio), cfg)?,
            FusionMethod::Lcm => fuse_lcm(pan, band, cfg)?,
        };
        f.source_band = k;
        out.push(f);
    }
    Ok(out)
}

fn same_dims(pan: &Band, ms: &Band) -> Result<()> {
    if pan.dimensions() != ms.dimensions() {
        return Err(Error::Dimension(format!(
            "pan {}x{} vs ms {}x{} (ms must be resampled to pan size)",
            pan.width(),
            pan.height(),
            ms.width(),
            ms.height()
        )));
    }
    Ok(())
}
