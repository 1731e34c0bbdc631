//! Synthetic PAN/MS pair generation.
//!
//! Derives a fusion test pair from a full-resolution reference image: the
//! PAN band is a weighted sum of the reference bands plus optional seeded
//! zero-mean Gaussian noise, and the MS image is the reference degraded by
//! the resolution ratio. Fusing the pair back to PAN resolution and scoring
//! against the reference closes the loop without real satellite data.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::raster::{degrade, Band, ImageStack, ResolutionRatio};

/// A generated PAN/MS pair plus the untouched reference.
#[derive(Clone, Debug)]
pub struct SynthPair {
    pub pan: Band,
    pub ms: ImageStack,
    pub truth: ImageStack,
}

/// Parameters of the synthetic protocol. `weights` must have one entry per
/// reference band; `None` means equal weights.
#[derive(Clone, Debug)]
pub struct SynthConfig {
    pub ratio: ResolutionRatio,
    pub weights: Option<Vec<f64>>,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SynthConfig {
    pub fn new(ratio: ResolutionRatio) -> Self {
        Self {
            ratio,
            weights: None,
            noise_sigma: 0.0,
            seed: 0,
        }
    }
}

/// Builds the pair. Deterministic: the same reference and config produce
/// bit-identical outputs.
pub fn generate(reference: &ImageStack, cfg: &SynthConfig) -> Result<SynthPair> {
    let k = reference.band_count();
    let weights = match &cfg.weights {
        Some(w) => {
            if w.len() != k {
                return Err(Error::Invalid(format!(
                    "{} weights given for {k} bands",
                    w.len()
                )));
            }
            if w.iter().any(|v| !v.is_finite()) {
                return Err(Error::Invalid("weights must be finite".into()));
            }
            w.clone()
        }
        None => vec![1.0 / k as f64; k],
    };
    if !cfg.noise_sigma.is_finite() || cfg.noise_sigma < 0.0 {
        return Err(Error::Invalid(format!(
            "noise sigma must be finite and non-negative, got {}",
            cfg.noise_sigma
        )));
    }

    let (w, h) = (reference.width(), reference.height());
    let mut pan = vec![0.0f64; w * h];
    for (band, &weight) in reference.bands().iter().zip(&weights) {
        for (acc, &v) in pan.iter_mut().zip(band.data()) {
            *acc += weight * v;
        }
    }
    if cfg.noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let normal = Normal::new(0.0, cfg.noise_sigma)
            .map_err(|e| Error::Invalid(format!("noise distribution: {e}")))?;
        for v in &mut pan {
            *v += normal.sample(&mut rng);
        }
    }
    let pan = Band::new(w, h, pan, reference.band(0).bit_depth())?;

    let ms = ImageStack::new(
        reference
            .bands()
            .iter()
            .map(|b| degrade(b, cfg.ratio))
            .collect::<Result<Vec<_>>>()?,
    )?;

    Ok(SynthPair {
        pan,
        ms,
        truth: reference.clone(),
    })
}
