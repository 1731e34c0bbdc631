//! Per-pixel local statistics over sliding windows.
//!
//! Every statistic is evaluated on a window centred on each pixel, with
//! out-of-bounds samples taken from the nearest edge pixel (replicate
//! border), so the output grid keeps the input dimensions. Window sums come
//! from summed-area tables built over an edge-padded copy of the input:
//! O(1) per pixel regardless of window size.
//!
//! Inputs are centred on their global mean before the tables are built and
//! the tables use compensated accumulation, which keeps full-scene sums
//! within a few ulp and makes constant-band outputs exact.

use crate::accum::{self, NeumaierSum};
use crate::error::{Error, Result};
use crate::raster::Band;

/// Border handling for windows that extend past the image edge.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BorderPolicy {
    /// Out-of-bounds samples take the value of the nearest edge pixel.
    #[default]
    Replicate,
}

/// Sliding-window geometry plus the degeneracy threshold for near-zero
/// denominators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowSpec {
    width: usize,
    height: usize,
    border: BorderPolicy,
    epsilon: f64,
}

impl WindowSpec {
    /// Default degeneracy threshold, in squared-DN units.
    pub const DEFAULT_EPSILON: f64 = 1e-12;

    /// Both dimensions must be odd so the window centres on a pixel.
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 || width % 2 == 0 || height % 2 == 0 {
            return Err(Error::Invalid(format!(
                "window dimensions must be odd and at least 1, got {width}x{height}"
            )));
        }
        Ok(Self {
            width,
            height,
            border: BorderPolicy::Replicate,
            epsilon: Self::DEFAULT_EPSILON,
        })
    }

    pub fn square(side: usize) -> Result<Self> {
        Self::new(side, side)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::Invalid(format!(
                "epsilon must be finite and non-negative, got {epsilon}"
            )));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn border(&self) -> BorderPolicy {
        self.border
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Samples per window.
    fn len(&self) -> usize {
        self.width * self.height
    }

    /// Half-extents (margin on each side of the centre pixel).
    fn margins(&self) -> (usize, usize) {
        (self.width / 2, self.height / 2)
    }
}

/// A band-shaped grid holding one statistic value per pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct StatPlane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl StatPlane {
    pub(crate) fn from_parts(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }
}

/// Per-pixel least-squares line fit: `m ~ intercept + slope * p`.
#[derive(Clone, Debug)]
pub struct LocalRegression {
    pub slope: StatPlane,
    pub intercept: StatPlane,
}

/// Input plane padded by replicate-edge margins.
struct Padded {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

fn pad_replicate(data: &[f64], width: usize, height: usize, mx: usize, my: usize) -> Padded {
    let pw = width + 2 * mx;
    let ph = height + 2 * my;
    let mut out = Vec::with_capacity(pw * ph);
    for py in 0..ph {
        let sy = py.saturating_sub(my).min(height - 1);
        let row = &data[sy * width..(sy + 1) * width];
        for _ in 0..mx {
            out.push(row[0]);
        }
        out.extend_from_slice(row);
        for _ in 0..mx {
            out.push(row[width - 1]);
        }
    }
    Padded {
        width: pw,
        height: ph,
        data: out,
    }
}

/// Summed-area table over a padded plane, with a zero top row and left
/// column so rectangle sums need no bounds special-casing.
struct Sat {
    width1: usize, // padded width + 1
    data: Vec<f64>,
}

impl Sat {
    fn build(values: &[f64], width: usize, height: usize) -> Self {
        let width1 = width + 1;
        let height1 = height + 1;
        let mut table = vec![0.0f64; width1 * height1];
        // Row-prefix pass, compensated per row.
        for y in 0..height {
            let src = &values[y * width..(y + 1) * width];
            let dst = &mut table[(y + 1) * width1 + 1..(y + 2) * width1];
            let mut run = NeumaierSum::new();
            for (d, &v) in dst.iter_mut().zip(src) {
                run.add(v);
                *d = run.total();
            }
        }
        // Column-prefix pass, compensated per column.
        let mut sums = vec![NeumaierSum::new(); width1];
        for y in 1..height1 {
            let row = &mut table[y * width1..(y + 1) * width1];
            for (x, cell) in row.iter_mut().enumerate() {
                sums[x].add(*cell);
                *cell = sums[x].total();
            }
        }
        Self { width1, data: table }
    }

    /// Sum over the inclusive rectangle [x0, x1] x [y0, y1] in padded
    /// coordinates.
    #[inline]
    fn rect_sum(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> f64 {
        let w = self.width1;
        let (a, b, c, d) = (
            self.data[(y1 + 1) * w + (x1 + 1)],
            self.data[y0 * w + x0],
            self.data[y0 * w + (x1 + 1)],
            self.data[(y1 + 1) * w + x0],
        );
        (a + b) - (c + d)
    }
}

/// Windowed sums of one or more planes sharing the same padding geometry.
struct WindowSums<'a> {
    sats: Vec<Sat>,
    win: &'a WindowSpec,
    width: usize,
    height: usize,
}

impl<'a> WindowSums<'a> {
    /// `planes` hold centred values at original resolution.
    fn build(planes: &[&[f64]], width: usize, height: usize, win: &'a WindowSpec) -> Self {
        let (mx, my) = win.margins();
        let sats = planes
            .iter()
            .map(|p| {
                let padded = pad_replicate(p, width, height, mx, my);
                Sat::build(&padded.data, padded.width, padded.height)
            })
            .collect();
        Self {
            sats,
            win,
            width,
            height,
        }
    }

    /// Calls `f` with the window sums of every plane, pixel by pixel in
    /// row-major order. The window centred on original pixel (x, y) spans
    /// [x, x + 2*mx] x [y, y + 2*my] in padded coordinates.
    fn for_each(&self, mut f: impl FnMut(usize, &[f64])) {
        let (mx, my) = self.win.margins();
        let mut sums = vec![0.0f64; self.sats.len()];
        let mut idx = 0;
        for y in 0..self.height {
            for x in 0..self.width {
                for (s, sat) in sums.iter_mut().zip(&self.sats) {
                    *s = sat.rect_sum(x, y, x + 2 * mx, y + 2 * my);
                }
                f(idx, &sums);
                idx += 1;
            }
        }
    }
}

fn centered(band: &Band) -> (f64, Vec<f64>) {
    let mean = accum::anchored_mean(band.data());
    let values = band.data().iter().map(|v| v - mean).collect();
    (mean, values)
}

fn require_same_dims(a: &Band, b: &Band, what: &str) -> Result<()> {
    if a.dimensions() != b.dimensions() {
        return Err(Error::Dimension(format!(
            "{what}: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

/// Arithmetic mean of the window centred on each pixel.
pub fn local_mean(band: &Band, win: &WindowSpec) -> StatPlane {
    let (w, h) = band.dimensions();
    let (global, cent) = centered(band);
    let inv_n = 1.0 / win.len() as f64;
    let sums = WindowSums::build(&[&cent], w, h, win);
    let mut out = vec![0.0f64; w * h];
    sums.for_each(|idx, s| {
        out[idx] = global + s[0] * inv_n;
    });
    StatPlane::from_parts(w, h, out)
}

/// Population standard deviation (divide by n) of each window; never
/// negative.
pub fn local_std(band: &Band, win: &WindowSpec) -> StatPlane {
    let (w, h) = band.dimensions();
    let (_, cent) = centered(band);
    let squares: Vec<f64> = cent.iter().map(|v| v * v).collect();
    let inv_n = 1.0 / win.len() as f64;
    let sums = WindowSums::build(&[&cent, &squares], w, h, win);
    let mut out = vec![0.0f64; w * h];
    sums.for_each(|idx, s| {
        let mean = s[0] * inv_n;
        let var = (s[1] * inv_n - mean * mean).max(0.0);
        out[idx] = var.sqrt();
    });
    StatPlane::from_parts(w, h, out)
}

/// Population covariance of two bands over each window.
pub fn local_cov(a: &Band, b: &Band, win: &WindowSpec) -> Result<StatPlane> {
    require_same_dims(a, b, "local_cov inputs")?;
    let (w, h) = a.dimensions();
    let (_, ca) = centered(a);
    let (_, cb) = centered(b);
    let products: Vec<f64> = ca.iter().zip(&cb).map(|(x, y)| x * y).collect();
    let inv_n = 1.0 / win.len() as f64;
    let sums = WindowSums::build(&[&ca, &cb, &products], w, h, win);
    let mut out = vec![0.0f64; w * h];
    sums.for_each(|idx, s| {
        out[idx] = s[2] * inv_n - (s[0] * inv_n) * (s[1] * inv_n);
    });
    Ok(StatPlane::from_parts(w, h, out))
}

/// Per-pixel least-squares fit of `m` on `p` over each window.
///
/// The slope is the window covariance of `p` and `m` over the window
/// variance of `p`; the intercept is `mean(m) - slope * mean(p)`. Windows
/// whose `p` variance falls below `win.epsilon()` (or is exactly zero) get
/// slope 0 and intercept `mean(m)`, so the fit degrades to the local mean.
pub fn local_regression(m: &Band, p: &Band, win: &WindowSpec) -> Result<LocalRegression> {
    require_same_dims(m, p, "local_regression inputs")?;
    let (w, h) = m.dimensions();
    let (gm, cm) = centered(m);
    let (gp, cp) = centered(p);
    let squares: Vec<f64> = cp.iter().map(|v| v * v).collect();
    let products: Vec<f64> = cp.iter().zip(&cm).map(|(x, y)| x * y).collect();
    let inv_n = 1.0 / win.len() as f64;
    let eps = win.epsilon();
    let sums = WindowSums::build(&[&cm, &cp, &squares, &products], w, h, win);
    let mut slope = vec![0.0f64; w * h];
    let mut intercept = vec![0.0f64; w * h];
    sums.for_each(|idx, s| {
        let mean_cm = s[0] * inv_n;
        let mean_cp = s[1] * inv_n;
        let var_p = (s[2] * inv_n - mean_cp * mean_cp).max(0.0);
        let mean_m = gm + mean_cm;
        if var_p < eps || var_p == 0.0 {
            slope[idx] = 0.0;
            intercept[idx] = mean_m;
        } else {
            let cov = s[3] * inv_n - mean_cp * mean_cm;
            let b = cov / var_p;
            slope[idx] = b;
            intercept[idx] = mean_m - b * (gp + mean_cp);
        }
    });
    Ok(LocalRegression {
        slope: StatPlane::from_parts(w, h, slope),
        intercept: StatPlane::from_parts(w, h, intercept),
    })
}
