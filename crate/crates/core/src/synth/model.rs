//! Pixelwise logistic segmenter, the desk-scale stand-in for a real
//! segmentation network.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds::substream;
use crate::synth::corrupt::{corrupt, CorruptionKind};
use crate::synth::image::{Mask, SynthImage};
use crate::synth::mask_metrics::dsc;

pub const SCALE_FLOOR: f64 = 1e-3;
const PROB_CLAMP: f64 = 1e-12;

/// p(pixel is target) = sigmoid((intensity - bias) / scale);
/// the predicted mask thresholds p at 0.5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToyModel {
    pub bias: f64,
    pub scale: f64,
}

impl ToyModel {
    /// Pixel probability, clamped into (0, 1) so downstream entropies stay
    /// finite even for extreme logits.
    pub fn probability(&self, intensity: f64) -> f64 {
        let z = (intensity - self.bias) / self.scale;
        let p = 1.0 / (1.0 + (-z).exp());
        p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
    }

    pub fn probabilities(&self, image: &SynthImage) -> Vec<f64> {
        image.pixels.iter().map(|&v| self.probability(v)).collect()
    }

    /// Predicted mask: probability strictly above 0.5.
    pub fn predict(&self, image: &SynthImage) -> Mask {
        let data = image
            .pixels
            .iter()
            .map(|&v| self.probability(v) > 0.5)
            .collect();
        Mask::new(image.height(), image.width(), data)
    }
}

struct ClassStats {
    n: f64,
    sum: f64,
    sum_sq: f64,
}

impl ClassStats {
    fn new() -> Self {
        ClassStats {
            n: 0.0,
            sum: 0.0,
            sum_sq: 0.0,
        }
    }

    fn push(&mut self, v: f64) {
        self.n += 1.0;
        self.sum += v;
        self.sum_sq += v * v;
    }

    fn mean(&self) -> f64 {
        self.sum / self.n
    }

    fn sum_sq_dev(&self) -> f64 {
        (self.sum_sq - self.sum * self.sum / self.n).max(0.0)
    }
}

fn class_stats(train: &[SynthImage]) -> Result<(ClassStats, ClassStats)> {
    if train.is_empty() {
        return Err(Error::ModelFit("no training images".to_string()));
    }
    let mut fg = ClassStats::new();
    let mut bg = ClassStats::new();
    for img in train {
        for (&v, &m) in img.pixels.iter().zip(img.mask.data()) {
            if m {
                fg.push(v);
            } else {
                bg.push(v);
            }
        }
    }
    if fg.n == 0.0 {
        return Err(Error::ModelFit(
            "all training masks are empty; cannot estimate the target class".to_string(),
        ));
    }
    if bg.n == 0.0 {
        return Err(Error::ModelFit(
            "training masks cover every pixel; cannot estimate the background class".to_string(),
        ));
    }
    Ok((fg, bg))
}

fn pooled_scale(fg: &ClassStats, bg: &ClassStats) -> f64 {
    let dof = fg.n + bg.n - 2.0;
    if dof <= 0.0 {
        return SCALE_FLOOR;
    }
    ((fg.sum_sq_dev() + bg.sum_sq_dev()) / dof).sqrt().max(SCALE_FLOOR)
}

/// Moment-matching fit: bias at the midpoint of the class means, scale at
/// the pooled within-class standard deviation (floored at 1e-3).
pub fn fit_toy_model(train: &[SynthImage]) -> Result<ToyModel> {
    let (fg, bg) = class_stats(train)?;
    Ok(ToyModel {
        bias: (fg.mean() + bg.mean()) / 2.0,
        scale: pooled_scale(&fg, &bg),
    })
}

/// Originals plus one gaussian-noise copy per (image, severity); the
/// training-time analog of corruption augmentation.
pub fn augment_with_noise(
    train: &[SynthImage],
    severities: &[u8],
    seed: u64,
) -> Result<Vec<SynthImage>> {
    let mut out = train.to_vec();
    let mut stream = 0u64;
    for img in train {
        for &severity in severities {
            out.push(corrupt(
                img,
                CorruptionKind::GaussianNoise,
                severity,
                substream(seed, stream),
            )?);
            stream += 1;
        }
    }
    Ok(out)
}

/// Task-objective fit: the bias maximizing the mean training Dice over a
/// fixed grid, scale pooled as in [`fit_toy_model`]. Fitting this on
/// augmented data yields the "robust" model variant whose bias shifts
/// toward the noise-tolerant operating point the midpoint rule cannot
/// reach.
pub fn fit_dice_optimal(train: &[SynthImage]) -> Result<ToyModel> {
    let (fg, bg) = class_stats(train)?;
    // Per image: sorted class intensities, so each candidate bias costs two
    // binary searches instead of a pixel sweep.
    let mut per_image: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(train.len());
    for img in train {
        let mut img_fg = Vec::new();
        let mut img_bg = Vec::new();
        for (&v, &m) in img.pixels.iter().zip(img.mask.data()) {
            if m {
                img_fg.push(v);
            } else {
                img_bg.push(v);
            }
        }
        img_fg.sort_by(f64::total_cmp);
        img_bg.sort_by(f64::total_cmp);
        per_image.push((img_fg, img_bg));
    }

    let mut best_bias = 0.5;
    let mut best_dice = f64::NEG_INFINITY;
    for step in 2..=98 {
        let bias = step as f64 / 100.0;
        let mut total = 0.0;
        for (img_fg, img_bg) in &per_image {
            let tp = img_fg.len() - img_fg.partition_point(|&v| v <= bias);
            let fp = img_bg.len() - img_bg.partition_point(|&v| v <= bias);
            let fun = img_fg.len() - tp;
            let denom = 2 * tp + fp + fun;
            total += if denom == 0 {
                1.0
            } else {
                2.0 * tp as f64 / denom as f64
            };
        }
        let mean = total / per_image.len() as f64;
        if mean > best_dice {
            best_dice = mean;
            best_bias = bias;
        }
    }
    Ok(ToyModel {
        bias: best_bias,
        scale: pooled_scale(&fg, &bg),
    })
}

/// Mean Dice of a model over a set of images, a convenience for benchmark
/// health checks.
pub fn mean_dice(model: &ToyModel, images: &[SynthImage]) -> Result<f64> {
    if images.is_empty() {
        return Err(Error::EmptyScores { what: "images" });
    }
    let mut total = 0.0;
    for img in images {
        total += dsc(&model.predict(img), &img.mask)?;
    }
    Ok(total / images.len() as f64)
}
