//! Core image representation and resampling primitives.
//!
//! A [`Band`] is a single-channel grid of digital numbers (DN) held as
//! `f64` regardless of the file bit depth, so that all fusion methods share
//! one numeric domain. An [`ImageStack`] is an ordered set of co-registered
//! bands of identical dimensions.

use crate::accum;
use crate::error::{Error, Result};

/// A single-channel 2-D grid of digital numbers, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Band {
    width: usize,
    height: usize,
    data: Vec<f64>,
    bit_depth: u32,
}

impl Band {
    /// Builds a band from row-major samples.
    ///
    /// Fails when `data.len() != width * height`, when either dimension is
    /// zero, or when any sample is NaN or infinite.
    pub fn new(width: usize, height: usize, data: Vec<f64>, bit_depth: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Invalid(format!(
                "band dimensions must be at least 1x1, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::Dimension(format!(
                "band data length {} does not equal {width}x{height}",
                data.len()
            )));
        }
        if let Some(idx) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!(
                "non-finite sample {} at index {idx}",
                data[idx]
            )));
        }
        Ok(Self {
            width,
            height,
            data,
            bit_depth,
        })
    }

    /// All samples set to `value`.
    pub fn constant(width: usize, height: usize, value: f64, bit_depth: u32) -> Result<Self> {
        Self::new(width, height, vec![value; width * height], bit_depth)
    }

    /// Builds a band by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        bit_depth: u32,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data, bit_depth)
    }

    // Values already validated by the caller.
    pub(crate) fn from_parts(width: usize, height: usize, data: Vec<f64>, bit_depth: u32) -> Self {
        debug_assert_eq!(data.len(), width * height);
        debug_assert!(data.iter().all(|v| v.is_finite()));
        Self {
            width,
            height,
            data,
            bit_depth,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Declared sample depth in bits; metadata only, never used to rescale.
    pub fn bit_depth(&self) -> u32 {
        self.bit_depth
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Row-major samples.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// One row of samples.
    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }
}

/// An ordered set of co-registered bands with identical dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageStack {
    bands: Vec<Band>,
}

impl ImageStack {
    /// Fails on an empty band list or mismatched band dimensions.
    pub fn new(bands: Vec<Band>) -> Result<Self> {
        let first = bands
            .first()
            .ok_or_else(|| Error::Invalid("image stack needs at least one band".into()))?;
        let dims = first.dimensions();
        for (k, band) in bands.iter().enumerate() {
            if band.dimensions() != dims {
                return Err(Error::Dimension(format!(
                    "band {k} is {}x{} but band 0 is {}x{}",
                    band.width(),
                    band.height(),
                    dims.0,
                    dims.1
                )));
            }
        }
        Ok(Self { bands })
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    pub fn band(&self, k: usize) -> &Band {
        &self.bands[k]
    }

    pub fn band_count(&self) -> usize {
        self.bands.len()
    }

    pub fn width(&self) -> usize {
        self.bands[0].width()
    }

    pub fn height(&self) -> usize {
        self.bands[0].height()
    }

    pub fn into_bands(self) -> Vec<Band> {
        self.bands
    }
}

/// Positive integer ratio between the PAN and MS pixel grids.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResolutionRatio(u32);

impl ResolutionRatio {
    pub const ONE: ResolutionRatio = ResolutionRatio(1);

    pub fn new(factor: u32) -> Result<Self> {
        if factor < 1 {
            return Err(Error::Invalid("resolution ratio must be at least 1".into()));
        }
        Ok(Self(factor))
    }

    pub fn factor(&self) -> u32 {
        self.0
    }

    fn as_usize(&self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for ResolutionRatio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Verdict of [`check_alignment`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Alignment {
    Aligned,
    Mismatch {
        pan: (usize, usize),
        ms: (usize, usize),
        factor: u32,
        expected_pan: (usize, usize),
    },
}

impl Alignment {
    pub fn is_aligned(&self) -> bool {
        matches!(self, Alignment::Aligned)
    }
}

impl std::fmt::Display for Alignment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Alignment::Aligned => write!(f, "aligned"),
            Alignment::Mismatch {
                pan,
                ms,
                factor,
                expected_pan,
            } => write!(
                f,
                "pan is {}x{} but ms {}x{} at ratio {} requires pan {}x{}",
                pan.0, pan.1, ms.0, ms.1, factor, expected_pan.0, expected_pan.1
            ),
        }
    }
}

/// Replicates every pixel into a `factor x factor` block.
///
/// Pure replication: no sample value is created or altered, so the set of
/// distinct DN values is preserved exactly. `factor` 1 returns a copy.
pub fn upsample_nearest(band: &Band, factor: ResolutionRatio) -> Band {
    let f = factor.as_usize();
    if f == 1 {
        return band.clone();
    }
    let (w, h) = band.dimensions();
    let (ow, oh) = (w * f, h * f);
    let mut data = Vec::with_capacity(ow * oh);
    for y in 0..h {
        let row = band.row(y);
        let row_start = data.len();
        for &v in row {
            data.extend(std::iter::repeat(v).take(f));
        }
        for _ in 1..f {
            data.extend_from_within(row_start..row_start + ow);
        }
    }
    Band::from_parts(ow, oh, data, band.bit_depth())
}

/// Box blur and decimation: each output pixel is the arithmetic mean of its
/// `factor x factor` source block.
///
/// Block means are computed relative to the block's first sample, so a block
/// of equal values yields that value bit-exactly; combined with
/// [`upsample_nearest`] this makes degrade an exact left inverse of
/// nearest-neighbour upsampling. Results are clamped to the block's value
/// range to keep rounding from overshooting the input extremes.
pub fn degrade(band: &Band, factor: ResolutionRatio) -> Result<Band> {
    let f = factor.as_usize();
    if f == 1 {
        return Ok(band.clone());
    }
    let (w, h) = band.dimensions();
    if w % f != 0 || h % f != 0 {
        return Err(Error::Dimension(format!(
            "band {w}x{h} is not divisible by factor {f}"
        )));
    }
    let (ow, oh) = (w / f, h / f);
    let inv_n = 1.0 / (f * f) as f64;
    let mut data = Vec::with_capacity(ow * oh);
    for by in 0..oh {
        for bx in 0..ow {
            let anchor = band.get(bx * f, by * f);
            let mut deltas = accum::NeumaierSum::new();
            let mut lo = anchor;
            let mut hi = anchor;
            for dy in 0..f {
                let row = band.row(by * f + dy);
                for &v in &row[bx * f..bx * f + f] {
                    deltas.add(v - anchor);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            let mean = anchor + deltas.total() * inv_n;
            data.push(mean.clamp(lo, hi));
        }
    }
    Ok(Band::from_parts(ow, oh, data, band.bit_depth()))
}

/// Checks that the PAN grid is exactly `factor` times the MS grid.
pub fn check_alignment(pan: &Band, ms: &ImageStack, factor: ResolutionRatio) -> Alignment {
    let f = factor.as_usize();
    let expected = (ms.width() * f, ms.height() * f);
    if pan.dimensions() == expected {
        Alignment::Aligned
    } else {
        Alignment::Mismatch {
            pan: pan.dimensions(),
            ms: (ms.width(), ms.height()),
            factor: factor.factor(),
            expected_pan: expected,
        }
    }
}
