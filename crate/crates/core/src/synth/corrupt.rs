//! Severity-parameterized corruptions, severities 0..=5.
//!
//! Severity 0 is the identity for every kind, bit for bit. The parameter
//! tables are fixed constants so runs are reproducible across machines.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synth::image::{clip_unit, sample_normal, ImageMeta, SynthImage};

pub const MAX_SEVERITY: u8 = 5;

/// Additive gaussian noise standard deviation per severity.
pub const NOISE_SIGMA: [f64; 6] = [0.0, 0.02, 0.05, 0.10, 0.20, 0.35];
/// Gamma-correction exponent per severity.
pub const GAMMA_EXPONENT: [f64; 6] = [1.0, 1.25, 1.5, 2.0, 3.0, 4.0];
/// Box-blur kernel half-width per severity.
pub const BLUR_HALF_WIDTH: [usize; 6] = [0, 1, 2, 3, 4, 5];
/// Contrast compression toward 0.5 per severity (1 = unchanged).
pub const CONTRAST_FACTOR: [f64; 6] = [1.0, 0.8, 0.6, 0.45, 0.3, 0.2];
/// Occluding square side in pixels per severity, filled with 0.5.
pub const OCCLUSION_SIDE: [usize; 6] = [0, 8, 12, 16, 24, 32];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorruptionKind {
    None,
    GaussianNoise,
    Gamma,
    Blur,
    Contrast,
    Occlusion,
}

impl CorruptionKind {
    /// The five real corruptions, in canonical order.
    pub fn all() -> [CorruptionKind; 5] {
        [
            CorruptionKind::GaussianNoise,
            CorruptionKind::Gamma,
            CorruptionKind::Blur,
            CorruptionKind::Contrast,
            CorruptionKind::Occlusion,
        ]
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            CorruptionKind::None => "none",
            CorruptionKind::GaussianNoise => "gaussian-noise",
            CorruptionKind::Gamma => "gamma",
            CorruptionKind::Blur => "blur",
            CorruptionKind::Contrast => "contrast",
            CorruptionKind::Occlusion => "occlusion",
        }
    }
}

impl fmt::Display for CorruptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CorruptionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(CorruptionKind::None),
            "gaussian-noise" => Ok(CorruptionKind::GaussianNoise),
            "gamma" => Ok(CorruptionKind::Gamma),
            "blur" => Ok(CorruptionKind::Blur),
            "contrast" => Ok(CorruptionKind::Contrast),
            "occlusion" => Ok(CorruptionKind::Occlusion),
            other => Err(Error::UnknownName {
                what: "corruption kind",
                value: other.to_string(),
            }),
        }
    }
}

/// Applies `kind` at `severity` to a copy of the image. Severity 0 returns
/// the pixels unchanged; the mask is never touched.
pub fn corrupt(image: &SynthImage, kind: CorruptionKind, severity: u8, seed: u64) -> Result<SynthImage> {
    if severity > MAX_SEVERITY {
        return Err(Error::InvalidSeverity(severity));
    }
    let meta = ImageMeta {
        seed,
        corruption: kind,
        severity,
    };
    if severity == 0 || kind == CorruptionKind::None {
        return Ok(SynthImage::new(
            image.height(),
            image.width(),
            image.pixels.clone(),
            image.mask.clone(),
            meta,
        ));
    }
    let s = severity as usize;
    let (h, w) = (image.height(), image.width());
    let pixels = match kind {
        CorruptionKind::None => unreachable!("handled above"),
        CorruptionKind::GaussianNoise => {
            let sigma = NOISE_SIGMA[s];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            image
                .pixels
                .iter()
                .map(|&v| clip_unit(v + sample_normal(&mut rng, 0.0, sigma)))
                .collect()
        }
        CorruptionKind::Gamma => {
            let gamma = GAMMA_EXPONENT[s];
            image
                .pixels
                .iter()
                .map(|&v| clip_unit(v.powf(gamma)))
                .collect()
        }
        CorruptionKind::Blur => {
            let half = BLUR_HALF_WIDTH[s];
            let mut out = Vec::with_capacity(h * w);
            for y in 0..h {
                let y0 = y.saturating_sub(half);
                let y1 = (y + half).min(h - 1);
                for x in 0..w {
                    let x0 = x.saturating_sub(half);
                    let x1 = (x + half).min(w - 1);
                    let mut sum = 0.0;
                    for yy in y0..=y1 {
                        for xx in x0..=x1 {
                            sum += image.pixel(yy, xx);
                        }
                    }
                    let count = ((y1 - y0 + 1) * (x1 - x0 + 1)) as f64;
                    out.push(clip_unit(sum / count));
                }
            }
            out
        }
        CorruptionKind::Contrast => {
            let factor = CONTRAST_FACTOR[s];
            image
                .pixels
                .iter()
                .map(|&v| clip_unit(0.5 + (v - 0.5) * factor))
                .collect()
        }
        CorruptionKind::Occlusion => {
            let side = OCCLUSION_SIDE[s].min(h).min(w);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let top = rng.gen_range(0..=(h - side));
            let left = rng.gen_range(0..=(w - side));
            let mut out = image.pixels.clone();
            for y in top..top + side {
                for x in left..left + side {
                    out[y * w + x] = 0.5;
                }
            }
            out
        }
    };
    Ok(SynthImage::new(h, w, pixels, image.mask.clone(), meta))
}
