//! Desk-scale OOD scorers. Both emit canonical polarity: higher means more
//! anomalous.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synth::image::SynthImage;
use crate::synth::model::ToyModel;

pub const IHF_BINS: usize = 16;
/// More training images than feature dimensions keeps the covariance usable.
pub const IHF_MIN_TRAIN: usize = IHF_BINS + 1;
pub const IHF_RIDGE: f64 = 1e-6;

/// A fitted detection scorer. Implementations are immutable once built, so
/// scoring can fan out across images freely.
pub trait OodScorer {
    fn name(&self) -> &'static str;
    fn score(&self, image: &SynthImage) -> f64;
}

/// Mean pixelwise binary prediction entropy of the segmentation model.
/// Confident (near-0/1) probability maps score low; washed-out maps score
/// high.
pub fn score_entropy(model: &ToyModel, image: &SynthImage) -> f64 {
    let mut sum = 0.0;
    for &v in &image.pixels {
        let p = model.probability(v);
        sum -= p * p.ln() + (1.0 - p) * (1.0 - p).ln();
    }
    sum / image.pixels.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyScorer {
    model: ToyModel,
}

impl EntropyScorer {
    pub fn new(model: ToyModel) -> Self {
        EntropyScorer { model }
    }
}

impl OodScorer for EntropyScorer {
    fn name(&self) -> &'static str {
        "entropy"
    }

    fn score(&self, image: &SynthImage) -> f64 {
        score_entropy(&self.model, image)
    }
}

/// Intensity-histogram features with a Mahalanobis distance to the
/// in-distribution feature Gaussian.
///
/// A fitted value of this type is the only way to score, so an "unfitted
/// scorer" is unrepresentable; fitting fails when fewer than
/// [`IHF_MIN_TRAIN`] images are supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IhfScorer {
    mean: Vec<f64>,
    /// Lower Cholesky factor of the ridge-regularized covariance,
    /// row-major 16x16.
    chol: Vec<f64>,
}

/// Normalized 16-bin intensity histogram over [0, 1].
pub fn intensity_histogram(image: &SynthImage) -> Vec<f64> {
    let mut counts = vec![0usize; IHF_BINS];
    for &v in &image.pixels {
        let bin = ((v * IHF_BINS as f64) as usize).min(IHF_BINS - 1);
        counts[bin] += 1;
    }
    let total = image.pixels.len() as f64;
    counts.into_iter().map(|c| c as f64 / total).collect()
}

impl IhfScorer {
    pub fn fit(train: &[SynthImage]) -> Result<Self> {
        if train.len() < IHF_MIN_TRAIN {
            return Err(Error::TooFewSamples {
                what: "intensity-histogram scorer fit",
                min: IHF_MIN_TRAIN,
                got: train.len(),
            });
        }
        let features: Vec<Vec<f64>> = train.iter().map(intensity_histogram).collect();
        let n = features.len() as f64;
        let mut mean = vec![0.0; IHF_BINS];
        for f in &features {
            for (m, &v) in mean.iter_mut().zip(f) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        // Sample covariance; histogram bins sum to one, so the raw matrix is
        // rank-deficient and the ridge is what makes it positive definite.
        let mut cov = vec![0.0; IHF_BINS * IHF_BINS];
        for f in &features {
            let d: Vec<f64> = f.iter().zip(&mean).map(|(a, b)| a - b).collect();
            for i in 0..IHF_BINS {
                for j in 0..IHF_BINS {
                    cov[i * IHF_BINS + j] += d[i] * d[j];
                }
            }
        }
        for v in &mut cov {
            *v /= n - 1.0;
        }
        for i in 0..IHF_BINS {
            cov[i * IHF_BINS + i] += IHF_RIDGE;
        }
        let chol = cholesky_lower(&cov, IHF_BINS)?;
        Ok(IhfScorer { mean, chol })
    }

    /// Mahalanobis distance of an image's histogram to the fitted Gaussian.
    pub fn distance(&self, image: &SynthImage) -> f64 {
        let f = intensity_histogram(image);
        let z: Vec<f64> = f.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        // Solve L y = z; the squared distance is |y|^2.
        let n = IHF_BINS;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut sum = z[i];
            for (j, &yj) in y.iter().enumerate().take(i) {
                sum -= self.chol[i * n + j] * yj;
            }
            y[i] = sum / self.chol[i * n + i];
        }
        y.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl OodScorer for IhfScorer {
    fn name(&self) -> &'static str {
        "ihf"
    }

    fn score(&self, image: &SynthImage) -> f64 {
        self.distance(image)
    }
}

pub fn score_ihf(scorer: &IhfScorer, image: &SynthImage) -> f64 {
    scorer.distance(image)
}

fn cholesky_lower(matrix: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = matrix[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(Error::ModelFit(format!(
                        "covariance not positive definite at pivot {i}"
                    )));
                }
                l[i * n + j] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Ok(l)
}
