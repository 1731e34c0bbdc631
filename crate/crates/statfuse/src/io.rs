//! Netpbm image files and report serialisation.
//!
//! PGM (P2/P5) carries a single band, PPM (P3/P6) a three-band stack.
//! Samples load unmodified into floating point; no rescaling happens on
//! read, so 6-bit data stored with maxval 63 keeps its DN values. Writes
//! always use the binary variants, big-endian two-byte samples when maxval
//! exceeds 255.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::{MetricCell, QualityReport};
use crate::raster::{Band, ImageStack};

/// The Netpbm variants this crate reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PnmFormat {
    PgmAscii,
    PgmBinary,
    PpmAscii,
    PpmBinary,
}

impl PnmFormat {
    fn channels(&self) -> usize {
        match self {
            PnmFormat::PgmAscii | PnmFormat::PgmBinary => 1,
            PnmFormat::PpmAscii | PnmFormat::PpmBinary => 3,
        }
    }

    fn is_ascii(&self) -> bool {
        matches!(self, PnmFormat::PgmAscii | PnmFormat::PpmAscii)
    }
}

/// Parsed Netpbm header.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ImageFileHeader {
    pub format: PnmFormat,
    pub width: usize,
    pub height: usize,
    pub maxval: u32,
}

impl ImageFileHeader {
    /// Bits needed to represent `maxval`.
    pub fn bit_depth(&self) -> u32 {
        32 - self.maxval.leading_zeros()
    }
}

/// Report output formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Invalid(format!(
                "unknown report format '{other}' (expected csv or json)"
            ))),
        }
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn parse_err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    /// Skips whitespace and `#` comments (comment runs to end of line).
    fn skip_separators(&mut self) {
        while let Some(b) = self.peek() {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(c) = self.peek() {
                    self.pos += 1;
                    if c == b'\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    /// Reads an unsigned decimal token.
    fn read_uint(&mut self, what: &str) -> Result<u64> {
        self.skip_separators();
        let start = self.pos;
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.parse_err(match self.peek() {
                Some(b) => format!("expected {what}, found byte 0x{b:02x}"),
                None => format!("expected {what}, found end of file"),
            }));
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("digits are utf-8");
        text.parse::<u64>()
            .map_err(|_| self.parse_err(format!("{what} '{text}' out of range")))
    }
}

fn parse_header(cur: &mut Cursor) -> Result<ImageFileHeader> {
    let magic = cur
        .bytes
        .get(0..2)
        .ok_or_else(|| cur.parse_err("file shorter than a magic number"))?;
    let format = match magic {
        b"P2" => PnmFormat::PgmAscii,
        b"P5" => PnmFormat::PgmBinary,
        b"P3" => PnmFormat::PpmAscii,
        b"P6" => PnmFormat::PpmBinary,
        other => {
            return Err(cur.parse_err(format!(
                "unsupported magic '{}' (expected P2, P3, P5 or P6)",
                String::from_utf8_lossy(other)
            )))
        }
    };
    cur.pos = 2;
    let width = cur.read_uint("width")? as usize;
    let height = cur.read_uint("height")? as usize;
    let maxval = cur.read_uint("maxval")?;
    if width == 0 || height == 0 {
        return Err(cur.parse_err(format!("dimensions must be positive, got {width}x{height}")));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(cur.parse_err(format!("maxval must be in 1..=65535, got {maxval}")));
    }
    Ok(ImageFileHeader {
        format,
        width,
        height,
        maxval: maxval as u32,
    })
}

fn read_binary_samples(cur: &mut Cursor, header: &ImageFileHeader, count: usize) -> Result<Vec<f64>> {
    // single whitespace byte terminates the header before the raster
    match cur.peek() {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        Some(b) => return Err(cur.parse_err(format!("expected whitespace after maxval, found 0x{b:02x}"))),
        None => return Err(cur.parse_err("expected raster data, found end of file")),
    }
    let wide = header.maxval > 255;
    let bytes_needed = count * if wide { 2 } else { 1 };
    let raster = cur
        .bytes
        .get(cur.pos..cur.pos + bytes_needed)
        .ok_or_else(|| {
            let have = cur.bytes.len() - cur.pos;
            Error::Parse {
                offset: cur.bytes.len(),
                message: format!("raster needs {bytes_needed} bytes, found {have}"),
            }
        })?;
    let mut out = Vec::with_capacity(count);
    if wide {
        for (i, pair) in raster.chunks_exact(2).enumerate() {
            let v = u16::from_be_bytes([pair[0], pair[1]]) as u32;
            if v > header.maxval {
                return Err(Error::Range {
                    offset: cur.pos + 2 * i,
                    message: format!("sample {v} exceeds maxval {}", header.maxval),
                });
            }
            out.push(v as f64);
        }
    } else {
        for (i, &b) in raster.iter().enumerate() {
            let v = b as u32;
            if v > header.maxval {
                return Err(Error::Range {
                    offset: cur.pos + i,
                    message: format!("sample {v} exceeds maxval {}", header.maxval),
                });
            }
            out.push(v as f64);
        }
    }
    Ok(out)
}

fn read_ascii_samples(cur: &mut Cursor, header: &ImageFileHeader, count: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let at = cur.pos;
        let v = cur.read_uint("sample")?;
        if v > header.maxval as u64 {
            return Err(Error::Range {
                offset: at,
                message: format!("sample {v} exceeds maxval {}", header.maxval),
            });
        }
        out.push(v as f64);
    }
    Ok(out)
}

fn decode(bytes: &[u8]) -> Result<(ImageFileHeader, ImageStack)> {
    let mut cur = Cursor::new(bytes);
    let header = parse_header(&mut cur)?;
    let channels = header.format.channels();
    let count = header.width * header.height * channels;
    let samples = if header.format.is_ascii() {
        read_ascii_samples(&mut cur, &header, count)?
    } else {
        read_binary_samples(&mut cur, &header, count)?
    };
    let bit_depth = header.bit_depth();
    let bands = if channels == 1 {
        vec![Band::new(header.width, header.height, samples, bit_depth)?]
    } else {
        // interleaved RGB -> per-band planes
        let mut planes = vec![Vec::with_capacity(header.width * header.height); 3];
        for chunk in samples.chunks_exact(3) {
            for (plane, &v) in planes.iter_mut().zip(chunk) {
                plane.push(v);
            }
        }
        planes
            .into_iter()
            .map(|p| Band::new(header.width, header.height, p, bit_depth))
            .collect::<Result<Vec<_>>>()?
    };
    Ok((header, ImageStack::new(bands)?))
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads a PGM or PPM file into a one- or three-band stack.
pub fn read_image(path: impl AsRef<Path>) -> Result<ImageStack> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    decode(&bytes).map(|(_, stack)| stack)
}

/// Reads only the header of a PGM or PPM file.
pub fn read_header(path: impl AsRef<Path>) -> Result<ImageFileHeader> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    parse_header(&mut Cursor::new(&bytes))
}

fn quantize(v: f64, maxval: u32) -> u32 {
    // clamp to [0, maxval], then round half up
    (v.clamp(0.0, maxval as f64) + 0.5).floor() as u32
}

fn encode(stack: &ImageStack, maxval: u32) -> Result<Vec<u8>> {
    if !(1..=65535).contains(&maxval) {
        return Err(Error::Invalid(format!(
            "maxval must be in 1..=65535, got {maxval}"
        )));
    }
    let channels = match stack.band_count() {
        1 => 1usize,
        3 => 3usize,
        n => {
            return Err(Error::Shape(format!(
                "image files carry 1 (PGM) or 3 (PPM) bands, got {n}"
            )))
        }
    };
    let magic = if channels == 1 { "P5" } else { "P6" };
    let (w, h) = (stack.width(), stack.height());
    let mut out = format!("{magic}\n{w} {h}\n{maxval}\n").into_bytes();
    let wide = maxval > 255;
    out.reserve(w * h * channels * if wide { 2 } else { 1 });
    for i in 0..w * h {
        for band in stack.bands() {
            let q = quantize(band.data()[i], maxval);
            if wide {
                out.extend_from_slice(&(q as u16).to_be_bytes());
            } else {
                out.push(q as u8);
            }
        }
    }
    Ok(out)
}

/// Writes a binary PGM (1 band) or PPM (3 bands), clamping samples to
/// `[0, maxval]` and rounding half up.
pub fn write_image(stack: &ImageStack, path: impl AsRef<Path>, maxval: u32) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode(stack, maxval)?;
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

fn render_cell(cell: &MetricCell) -> String {
    match cell {
        MetricCell::Value(v) => format!("{v:.4}"),
        MetricCell::Absent | MetricCell::Failed(_) => String::new(),
    }
}

/// Renders a report as CSV with the fixed column order
/// `method,band,SD,En,SNR,NRMSE,DI,CC`. Blank and failed cells become
/// empty fields; values carry four decimal places.
pub fn render_report_csv(report: &QualityReport) -> String {
    let mut out = String::from("method,band,SD,En,SNR,NRMSE,DI,CC\n");
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.method,
            row.band,
            render_cell(&row.sd),
            render_cell(&row.en),
            render_cell(&row.snr),
            render_cell(&row.nrmse),
            render_cell(&row.di),
            render_cell(&row.cc),
        ));
    }
    out
}

#[derive(serde::Serialize)]
struct JsonRow<'a> {
    method: &'a str,
    band: usize,
    #[serde(rename = "SD")]
    sd: Option<f64>,
    #[serde(rename = "En")]
    en: Option<f64>,
    #[serde(rename = "SNR")]
    snr: Option<f64>,
    #[serde(rename = "NRMSE")]
    nrmse: Option<f64>,
    #[serde(rename = "DI")]
    di: Option<f64>,
    #[serde(rename = "CC")]
    cc: Option<f64>,
}

fn round4(cell: &MetricCell) -> Option<f64> {
    cell.value().map(|v| (v * 10000.0).round() / 10000.0)
}

/// Renders a report as a JSON list of row objects; blank and failed cells
/// become nulls. Values are rounded to four decimal places to match the
/// CSV rendering.
pub fn render_report_json(report: &QualityReport) -> String {
    let rows: Vec<JsonRow> = report
        .rows
        .iter()
        .map(|row| JsonRow {
            method: &row.method,
            band: row.band,
            sd: round4(&row.sd),
            en: round4(&row.en),
            snr: round4(&row.snr),
            nrmse: round4(&row.nrmse),
            di: round4(&row.di),
            cc: round4(&row.cc),
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&rows).expect("report rows serialize");
    text.push('\n');
    text
}

/// Serialises a report to disk in the requested format.
pub fn write_report(report: &QualityReport, path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    let path = path.as_ref();
    let text = match format {
        ReportFormat::Csv => render_report_csv(report),
        ReportFormat::Json => render_report_json(report),
    };
    fs::write(path, text).map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::ReportRow;

    fn decode_bytes(bytes: &[u8]) -> Result<ImageStack> {
        decode(bytes).map(|(_, s)| s)
    }

    #[test]
    fn reads_binary_pgm() {
        let bytes = b"P5\n2 2\n255\n\x00\x40\x80\xff";
        let stack = decode_bytes(bytes).unwrap();
        assert_eq!(stack.band_count(), 1);
        assert_eq!(stack.band(0).data(), &[0.0, 64.0, 128.0, 255.0]);
        assert_eq!(stack.band(0).bit_depth(), 8);
    }

    #[test]
    fn reads_ascii_pgm_with_comments() {
        let bytes = b"P2 # comment\n# another comment\n 3 1 # dims\n255\n1 2 3\n";
        let stack = decode_bytes(bytes).unwrap();
        assert_eq!(stack.band(0).data(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn reads_ppm_splitting_channels() {
        let bytes = b"P6\n1 1\n255\n\x0a\x14\x1e";
        let stack = decode_bytes(bytes).unwrap();
        assert_eq!(stack.band_count(), 3);
        assert_eq!(stack.band(0).data(), &[10.0]);
        assert_eq!(stack.band(1).data(), &[20.0]);
        assert_eq!(stack.band(2).data(), &[30.0]);
    }

    #[test]
    fn reads_sixteen_bit_big_endian() {
        let bytes = b"P5\n2 1\n65535\n\x01\x00\xff\xfe";
        let stack = decode_bytes(bytes).unwrap();
        assert_eq!(stack.band(0).data(), &[256.0, 65534.0]);
        assert_eq!(stack.band(0).bit_depth(), 16);
    }

    #[test]
    fn maxval_63_keeps_values_and_depth() {
        let bytes = b"P5\n2 1\n63\n\x00\x3f";
        let stack = decode_bytes(bytes).unwrap();
        assert_eq!(stack.band(0).data(), &[0.0, 63.0]);
        assert_eq!(stack.band(0).bit_depth(), 6);
    }

    #[test]
    fn parse_error_carries_offset() {
        let bytes = b"P5\n2 X\n255\n";
        match decode_bytes(bytes) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_raster_is_a_parse_error() {
        let bytes = b"P5\n2 2\n255\n\x01\x02";
        assert!(matches!(decode_bytes(bytes), Err(Error::Parse { .. })));
    }

    #[test]
    fn sample_above_maxval_is_a_range_error() {
        let bytes = b"P5\n2 1\n63\n\x10\x40";
        assert!(matches!(decode_bytes(bytes), Err(Error::Range { .. })));
        let ascii = b"P2\n2 1\n63\n16 64\n";
        assert!(matches!(decode_bytes(ascii), Err(Error::Range { .. })));
    }

    #[test]
    fn unknown_magic_is_rejected() {
        assert!(matches!(
            decode_bytes(b"P7\n1 1\n255\n\x00"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn write_rounds_half_up_and_clamps() {
        let stack = ImageStack::new(vec![Band::new(
            3,
            1,
            vec![3.6, -2.0, 300.0],
            8,
        )
        .unwrap()])
        .unwrap();
        let bytes = encode(&stack, 255).unwrap();
        assert_eq!(&bytes[bytes.len() - 3..], &[4u8, 0, 255]);
    }

    #[test]
    fn write_rejects_two_band_stack() {
        let b = Band::constant(2, 2, 0.0, 8).unwrap();
        let stack = ImageStack::new(vec![b.clone(), b]).unwrap();
        assert!(matches!(encode(&stack, 255), Err(Error::Shape(_))));
    }

    #[test]
    fn roundtrip_preserves_integer_bands() {
        let band = Band::from_fn(7, 5, 8, |x, y| ((x * 37 + y * 11) % 256) as f64).unwrap();
        let stack = ImageStack::new(vec![band]).unwrap();
        let bytes = encode(&stack, 255).unwrap();
        let back = decode_bytes(&bytes).unwrap();
        assert_eq!(back.band(0).data(), stack.band(0).data());
    }

    #[test]
    fn roundtrip_sixteen_bit() {
        let band = Band::from_fn(4, 3, 16, |x, y| ((x * 9001 + y * 777) % 65536) as f64).unwrap();
        let stack = ImageStack::new(vec![band]).unwrap();
        let bytes = encode(&stack, 65535).unwrap();
        let back = decode_bytes(&bytes).unwrap();
        assert_eq!(back.band(0).data(), stack.band(0).data());
    }

    fn sample_report() -> QualityReport {
        QualityReport {
            rows: vec![
                ReportRow {
                    method: "ORIGIN".into(),
                    band: 1,
                    sd: MetricCell::Value(51.018),
                    en: MetricCell::Value(5.2093),
                    snr: MetricCell::Absent,
                    nrmse: MetricCell::Absent,
                    di: MetricCell::Absent,
                    cc: MetricCell::Absent,
                },
                ReportRow {
                    method: "RVS".into(),
                    band: 1,
                    sd: MetricCell::Value(51.323),
                    en: MetricCell::Value(5.8841),
                    snr: MetricCell::Value(7.855),
                    nrmse: MetricCell::Value(0.078),
                    di: MetricCell::Value(0.085),
                    cc: MetricCell::Value(0.924),
                },
            ],
        }
    }

    #[test]
    fn csv_rendering_matches_fixed_layout() {
        let csv = render_report_csv(&sample_report());
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "method,band,SD,En,SNR,NRMSE,DI,CC");
        assert_eq!(lines.next().unwrap(), "ORIGIN,1,51.0180,5.2093,,,,");
        assert_eq!(
            lines.next().unwrap(),
            "RVS,1,51.3230,5.8841,7.8550,0.0780,0.0850,0.9240"
        );
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn empty_report_is_header_only() {
        let csv = render_report_csv(&QualityReport::default());
        assert_eq!(csv, "method,band,SD,En,SNR,NRMSE,DI,CC\n");
    }

    #[test]
    fn json_rendering_uses_nulls_for_absent() {
        let json = render_report_json(&sample_report());
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        let rows = parsed.as_array().unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0]["method"], "ORIGIN");
        assert_eq!(rows[0]["band"], 1);
        assert!(rows[0]["SNR"].is_null());
        assert_eq!(rows[1]["CC"], 0.924);
        assert_eq!(rows[1]["SD"], 51.323);
    }
}
