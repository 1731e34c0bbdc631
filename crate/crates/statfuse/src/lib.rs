//! Statistical pan-sharpening of remote-sensing imagery.
//!
//! Fuses a high-resolution panchromatic (PAN) band with a low-resolution
//! multispectral (MS) image using four pixel-level statistical methods —
//! local mean matching (LMM), local mean and variance matching (LMVM),
//! regression variable substitution (RVS) and local correlation modelling
//! (LCM) — and scores the results with six fusion-quality indices
//! (SD, En, CC, SNR, NRMSE, DI).
//!
//! The sliding-window statistics behind all four methods are computed with
//! summed-area tables, so window size does not affect per-pixel cost.

pub mod error;
pub mod fusion;
pub mod io;
pub mod metrics;
pub mod raster;
pub mod synth;
pub mod window_stats;

mod accum;

pub use error::{Error, Result};
pub use fusion::{FusedBand, FusionConfig, FusionMethod};
pub use metrics::{MetricCell, QualityReport, ReportRow};
pub use raster::{Alignment, Band, ImageStack, ResolutionRatio};
pub use window_stats::{StatPlane, WindowSpec};
