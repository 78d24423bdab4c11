//! Rejection-threshold selection from in-distribution scores.
//!
//! The threshold tau is the smallest observed id-test score retaining at
//! least N% of the id-test samples under the <=-inclusive rule. Ties at tau
//! are retained, which guarantees the TPR floor even for heavily tied score
//! distributions. The no-ood policy rejects nothing (tau = +inf) and lets
//! reports treat "no rejection" as just another method.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::records::SampleRecord;

pub const DEFAULT_N_PERCENT: f64 = 95.0;

/// How the rejection threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ThresholdPolicy {
    /// Retain at least `n_percent` of the id-test samples.
    TprAtN { n_percent: f64 },
    /// Reject nothing.
    NoOod,
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        ThresholdPolicy::TprAtN {
            n_percent: DEFAULT_N_PERCENT,
        }
    }
}

impl ThresholdPolicy {
    pub fn validate(&self) -> Result<()> {
        match self {
            ThresholdPolicy::TprAtN { n_percent } => {
                if !(n_percent.is_finite() && *n_percent > 0.0 && *n_percent <= 100.0) {
                    return Err(Error::InvalidPolicy(format!(
                        "n_percent must lie in (0, 100], got {n_percent}"
                    )));
                }
                Ok(())
            }
            ThresholdPolicy::NoOod => Ok(()),
        }
    }
}

/// Fitted rejection threshold. Samples with `ood_score <= tau` are
/// classified in-distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub tau: f64,
    /// Fraction of the fitting id-test set retained at tau; can exceed
    /// n_percent/100 under ties.
    pub achieved_tpr: f64,
}

/// Per-sample in-distribution decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub sample_id: String,
    pub id_flag: bool,
}

/// Smallest retention count satisfying the N% floor: ceil(n_percent * n / 100),
/// clamped to [1, n].
pub(crate) fn retention_rank(n_percent: f64, n: usize) -> usize {
    let k = (n_percent * n as f64 / 100.0).ceil() as usize;
    k.clamp(1, n)
}

/// Fits tau on the id-test scores so the policy's retention floor holds.
pub fn fit_threshold(id_scores: &[f64], policy: ThresholdPolicy) -> Result<Threshold> {
    policy.validate()?;
    if id_scores.is_empty() {
        return Err(Error::EmptyScores { what: "id_scores" });
    }
    match policy {
        ThresholdPolicy::NoOod => Ok(Threshold {
            tau: f64::INFINITY,
            achieved_tpr: 1.0,
        }),
        ThresholdPolicy::TprAtN { n_percent } => {
            let mut sorted = id_scores.to_vec();
            sorted.sort_by(f64::total_cmp);
            let k = retention_rank(n_percent, sorted.len());
            let tau = sorted[k - 1];
            let retained = sorted.partition_point(|&s| s <= tau);
            Ok(Threshold {
                tau,
                achieved_tpr: retained as f64 / sorted.len() as f64,
            })
        }
    }
}

/// Applies the <=-inclusive rule to every sample, preserving order.
pub fn decide(samples: &[SampleRecord], threshold: Threshold) -> Vec<Decision> {
    samples
        .iter()
        .map(|rec| Decision {
            sample_id: rec.sample_id.clone(),
            id_flag: rec.ood_score <= threshold.tau,
        })
        .collect()
}

/// Flag form of [`decide`] for raw score slices.
pub fn flag_scores(scores: &[f64], threshold: Threshold) -> Vec<bool> {
    scores.iter().map(|&s| s <= threshold.tau).collect()
}
