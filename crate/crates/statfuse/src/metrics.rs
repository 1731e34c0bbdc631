//! Fusion-quality indices and report assembly.
//!
//! Six indices: standard deviation (SD) and entropy (En) describe a single
//! band; correlation coefficient (CC), signal-to-noise ratio (SNR),
//! normalised root-mean-square error (NRMSE) and deviation index (DI)
//! compare a fused band against its reference. [`evaluate_stack`] assembles
//! them into a per-band, per-method [`QualityReport`].
//!
//! SNR is the fused band's energy over the squared error, and NRMSE is
//! normalised by a fixed 255 full scale, matching the published
//! definitions rather than the more common signal-processing forms.

use crate::accum::{self, NeumaierSum};
use crate::error::{Error, Result};
use crate::fusion::FusedBand;
use crate::raster::{upsample_nearest, Band, ImageStack, ResolutionRatio};

/// Reference pixels at or below this DN are skipped by per-pixel divisions.
const DIVISION_EPSILON: f64 = 1e-12;

/// The six quality indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricName {
    Sd,
    En,
    Cc,
    Snr,
    Nrmse,
    Di,
}

impl MetricName {
    pub fn label(&self) -> &'static str {
        match self {
            MetricName::Sd => "SD",
            MetricName::En => "En",
            MetricName::Cc => "CC",
            MetricName::Snr => "SNR",
            MetricName::Nrmse => "NRMSE",
            MetricName::Di => "DI",
        }
    }
}

impl std::fmt::Display for MetricName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Bin counts over discrete DN levels `0..levels`.
#[derive(Clone, Debug)]
pub struct Histogram {
    counts: Vec<u64>,
    total: u64,
}

impl Histogram {
    /// Quantises samples by round-half-up then clamps into `[0, levels-1]`.
    pub fn from_band(band: &Band, levels: u32) -> Self {
        assert!(levels >= 2, "histogram needs at least 2 levels");
        let mut counts = vec![0u64; levels as usize];
        let top = (levels - 1) as f64;
        for &v in band.data() {
            let q = (v + 0.5).floor().clamp(0.0, top) as usize;
            counts[q] += 1;
        }
        Self {
            counts,
            total: band.data().len() as u64,
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn levels(&self) -> u32 {
        self.counts.len() as u32
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Normalised bin probabilities; sums to 1.
    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.total as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

/// Population standard deviation of all samples.
pub fn std_dev(band: &Band) -> f64 {
    let mean = accum::anchored_mean(band.data());
    let ss = accum::sum(band.data().iter().map(|v| (v - mean) * (v - mean)));
    (ss / band.data().len() as f64).max(0.0).sqrt()
}

/// Shannon entropy in bits of the band's quantised histogram.
///
/// Result lies in `[0, log2(levels)]`.
pub fn entropy(band: &Band, levels: u32) -> f64 {
    let hist = Histogram::from_band(band, levels);
    let n = hist.total() as f64;
    let mut acc = NeumaierSum::new();
    for &c in hist.counts() {
        if c > 0 {
            let p = c as f64 / n;
            acc.add(-p * p.log2());
        }
    }
    acc.total().max(0.0)
}

/// Pearson correlation coefficient between two bands, in `[-1, 1]`.
///
/// Fails when either band is constant (zero denominator).
pub fn correlation(f: &Band, m: &Band) -> Result<f64> {
    same_dims(f, m, "correlation")?;
    let mf = accum::anchored_mean(f.data());
    let mm = accum::anchored_mean(m.data());
    let mut sff = NeumaierSum::new();
    let mut smm = NeumaierSum::new();
    let mut sfm = NeumaierSum::new();
    for (&a, &b) in f.data().iter().zip(m.data()) {
        let (da, db) = (a - mf, b - mm);
        sff.add(da * da);
        smm.add(db * db);
        sfm.add(da * db);
    }
    let denom = sff.total() * smm.total();
    if denom <= 0.0 {
        return Err(Error::Degenerate(
            "correlation undefined: at least one band is constant".into(),
        ));
    }
    Ok((sfm.total() / denom.sqrt()).clamp(-1.0, 1.0))
}

/// Ratio of the fused band's energy to the squared error, square-rooted.
///
/// Fails when the two bands are identical (zero error energy).
pub fn snr(f: &Band, m: &Band) -> Result<f64> {
    same_dims(f, m, "snr")?;
    let signal = accum::sum(f.data().iter().map(|v| v * v));
    let noise = accum::sum(f.data().iter().zip(m.data()).map(|(a, b)| {
        let d = a - b;
        d * d
    }));
    if noise <= 0.0 {
        return Err(Error::Degenerate(
            "snr undefined: fused equals reference everywhere".into(),
        ));
    }
    Ok((signal / noise).sqrt())
}

/// Root-mean-square error normalised by a 255 full scale.
///
/// Zero iff the bands are identical; 1 when they differ by 255 everywhere.
pub fn nrmse(f: &Band, m: &Band) -> Result<f64> {
    same_dims(f, m, "nrmse")?;
    let n = f.data().len() as f64;
    let ss = accum::sum(f.data().iter().zip(m.data()).map(|(a, b)| {
        let d = a - b;
        d * d
    }));
    Ok((ss / (n * 255.0 * 255.0)).sqrt())
}

/// Mean absolute relative deviation `|f - m| / m` over reference pixels
/// with `m` above the division threshold, normalised by the included count.
///
/// Fails when every reference pixel is at or below the threshold.
pub fn deviation_index(f: &Band, m: &Band) -> Result<f64> {
    same_dims(f, m, "deviation_index")?;
    let mut acc = NeumaierSum::new();
    let mut included = 0u64;
    for (&a, &b) in f.data().iter().zip(m.data()) {
        if b > DIVISION_EPSILON {
            acc.add((a - b).abs() / b);
            included += 1;
        }
    }
    if included == 0 {
        return Err(Error::Degenerate(
            "deviation index undefined: no reference pixel above zero".into(),
        ));
    }
    Ok(acc.total() / included as f64)
}

fn same_dims(f: &Band, m: &Band, what: &str) -> Result<()> {
    if f.dimensions() != m.dimensions() {
        return Err(Error::Dimension(format!(
            "{what}: {}x{} vs {}x{}",
            f.width(),
            f.height(),
            m.width(),
            m.height()
        )));
    }
    Ok(())
}

/// One cell of a quality report.
#[derive(Clone, Debug, PartialEq)]
pub enum MetricCell {
    Value(f64),
    /// Intentionally blank, like the comparative columns of reference rows.
    Absent,
    /// The metric could not be computed; carries the reason.
    Failed(String),
}

impl MetricCell {
    pub fn value(&self) -> Option<f64> {
        match self {
            MetricCell::Value(v) => Some(*v),
            _ => None,
        }
    }

    fn from_result(r: Result<f64>) -> Self {
        match r {
            Ok(v) => MetricCell::Value(v),
            Err(e) => MetricCell::Failed(e.to_string()),
        }
    }
}

/// One (method, band) row of the report. Band indices are 1-based, as in
/// the published tables.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub method: String,
    pub band: usize,
    pub sd: MetricCell,
    pub en: MetricCell,
    pub snr: MetricCell,
    pub nrmse: MetricCell,
    pub di: MetricCell,
    pub cc: MetricCell,
}

impl ReportRow {
    /// All-failed row used when a whole method could not run.
    pub fn failed(method: &str, band: usize, reason: &str) -> Self {
        let cell = || MetricCell::Failed(reason.to_string());
        Self {
            method: method.to_string(),
            band,
            sd: cell(),
            en: cell(),
            snr: cell(),
            nrmse: cell(),
            di: cell(),
            cc: cell(),
        }
    }
}

/// Per-band, per-method metric table, with ORIGIN rows for the reference
/// image first.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QualityReport {
    pub rows: Vec<ReportRow>,
}

/// Label used for the reference-image rows.
pub const ORIGIN_LABEL: &str = "ORIGIN";

fn origin_rows(reference: &ImageStack, levels: u32) -> Vec<ReportRow> {
    reference
        .bands()
        .iter()
        .enumerate()
        .map(|(k, band)| ReportRow {
            method: ORIGIN_LABEL.to_string(),
            band: k + 1,
            sd: MetricCell::Value(std_dev(band)),
            en: MetricCell::Value(entropy(band, levels)),
            snr: MetricCell::Absent,
            nrmse: MetricCell::Absent,
            di: MetricCell::Absent,
            cc: MetricCell::Absent,
        })
        .collect()
}

/// Upsample factor taking the reference band to the fused dimensions.
fn reference_factor(fused: &Band, reference: &ImageStack) -> Result<ResolutionRatio> {
    let (fw, fh) = fused.dimensions();
    let (rw, rh) = (reference.width(), reference.height());
    if fw % rw == 0 && fh % rh == 0 && fw / rw == fh / rh {
        ResolutionRatio::new((fw / rw) as u32)
    } else {
        Err(Error::Dimension(format!(
            "fused {fw}x{fh} is not an integer multiple of reference {rw}x{rh}"
        )))
    }
}

fn comparison_row(label: &str, band_index: usize, fused: &Band, reference_up: &Band, levels: u32) -> ReportRow {
    ReportRow {
        method: label.to_string(),
        band: band_index + 1,
        sd: MetricCell::Value(std_dev(fused)),
        en: MetricCell::Value(entropy(fused, levels)),
        snr: MetricCell::from_result(snr(fused, reference_up)),
        nrmse: MetricCell::from_result(nrmse(fused, reference_up)),
        di: MetricCell::from_result(deviation_index(fused, reference_up)),
        cc: MetricCell::from_result(correlation(fused, reference_up)),
    }
}

/// Scores fused bands against the original reference image.
///
/// The reference is nearest-neighbour upsampled to the fused dimensions
/// before comparison. Rows appear in input order after the ORIGIN rows;
/// per-metric degeneracies are recorded in the row instead of aborting.
pub fn evaluate_stack(
    fused: &[FusedBand],
    reference: &ImageStack,
    levels: u32,
) -> Result<QualityReport> {
    let mut rows = origin_rows(reference, levels);
    let mut cache: Vec<Option<Band>> = vec![None; reference.band_count()];
    for f in fused {
        let k = f.source_band;
        if k >= reference.band_count() {
            return Err(Error::Dimension(format!(
                "fused band references source band {k} but reference has {} bands",
                reference.band_count()
            )));
        }
        let factor = reference_factor(&f.band, reference)?;
        if cache[k].as_ref().map(|b| b.dimensions()) != Some(f.band.dimensions()) {
            cache[k] = Some(upsample_nearest(reference.band(k), factor));
        }
        let up = cache[k].as_ref().unwrap();
        rows.push(comparison_row(f.method.label(), k, &f.band, up, levels));
    }
    Ok(QualityReport { rows })
}

/// Scores a whole fused stack under one label, band by band, against the
/// reference. Band counts must match.
pub fn evaluate_labeled(
    label: &str,
    fused: &ImageStack,
    reference: &ImageStack,
    levels: u32,
) -> Result<QualityReport> {
    if fused.band_count() != reference.band_count() {
        return Err(Error::Dimension(format!(
            "fused has {} bands but reference has {}",
            fused.band_count(),
            reference.band_count()
        )));
    }
    let mut rows = origin_rows(reference, levels);
    for (k, band) in fused.bands().iter().enumerate() {
        let factor = reference_factor(band, reference)?;
        let up = upsample_nearest(reference.band(k), factor);
        rows.push(comparison_row(label, k, band, &up, levels));
    }
    Ok(QualityReport { rows })
}
