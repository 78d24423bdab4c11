//! World generation and the end-to-end benchmark loop.
//!
//! A world is a train split, an id-test split, and one OOD block per
//! corruption kind holding `n_ood_per_config` fresh images at each severity
//! 0..=5. The severity-0 block is an uncorrupted holdout disjoint from
//! id-test, so severity sweeps measure it instead of reusing the set the
//! threshold was fitted on.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::records::{Polarity, SampleRecord, ScoreTable, ID_COHORT};
use crate::seeds::substream;
use crate::synth::corrupt::{corrupt, CorruptionKind, MAX_SEVERITY};
use crate::synth::image::{render_image, SynthImage};
use crate::synth::mask_metrics::{avg_fp, dsc};
use crate::synth::model::ToyModel;
use crate::synth::scorer::OodScorer;

pub const DEFAULT_IMAGE_SIDE: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    pub seed: u64,
    pub n_train: usize,
    pub n_id_test: usize,
    /// Images per (corruption kind, severity) cell.
    pub n_ood_per_config: usize,
    pub kinds: Vec<CorruptionKind>,
    pub height: usize,
    pub width: usize,
}

impl WorldConfig {
    /// 64x64 world over all five corruption kinds.
    pub fn new(seed: u64, n_train: usize, n_id_test: usize, n_ood_per_config: usize) -> Self {
        WorldConfig {
            seed,
            n_train,
            n_id_test,
            n_ood_per_config,
            kinds: CorruptionKind::all().to_vec(),
            height: DEFAULT_IMAGE_SIDE,
            width: DEFAULT_IMAGE_SIDE,
        }
    }

    pub fn with_kinds(mut self, kinds: Vec<CorruptionKind>) -> Self {
        self.kinds = kinds;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_train == 0 || self.n_id_test == 0 || self.n_ood_per_config == 0 {
            return Err(Error::InvalidWorld(
                "n_train, n_id_test and n_ood_per_config must all be at least 1".to_string(),
            ));
        }
        if self.height < 16 || self.width < 16 {
            return Err(Error::InvalidWorld(format!(
                "image side too small: {}x{}",
                self.height, self.width
            )));
        }
        if self.kinds.is_empty() {
            return Err(Error::InvalidWorld(
                "at least one corruption kind required".to_string(),
            ));
        }
        if self.kinds.contains(&CorruptionKind::None) {
            return Err(Error::InvalidWorld(
                "`none` is not a benchmark corruption; severity-0 blocks cover it".to_string(),
            ));
        }
        Ok(())
    }
}

/// Fully rendered benchmark world. OOD images are ordered by
/// (kind, severity, index) and carry both in their meta.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthWorld {
    pub config: WorldConfig,
    pub train: Vec<SynthImage>,
    pub id_test: Vec<SynthImage>,
    pub ood: Vec<SynthImage>,
}

/// Renders a world deterministically: image k of the run uses substream
/// (seed, k), and each corruption draws from a substream of its base image.
pub fn generate_world(config: &WorldConfig) -> Result<SynthWorld> {
    config.validate()?;
    let (h, w) = (config.height, config.width);
    let mut next_index = 0u64;
    let mut next_seed = || {
        let s = substream(config.seed, next_index);
        next_index += 1;
        s
    };

    let train: Vec<SynthImage> = (0..config.n_train)
        .map(|_| render_image(h, w, next_seed()))
        .collect();
    let id_test: Vec<SynthImage> = (0..config.n_id_test)
        .map(|_| render_image(h, w, next_seed()))
        .collect();

    let mut ood = Vec::new();
    for &kind in &config.kinds {
        for severity in 0..=MAX_SEVERITY {
            for _ in 0..config.n_ood_per_config {
                let render_seed = next_seed();
                let base = render_image(h, w, render_seed);
                ood.push(corrupt(&base, kind, severity, substream(render_seed, 1))?);
            }
        }
    }

    Ok(SynthWorld {
        config: config.clone(),
        train,
        id_test,
        ood,
    })
}

/// Downstream performance metric recorded into the score table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerfMetric {
    Dsc,
    /// Negated false-positive component count, so lower drop stays better.
    NegAvgFp,
}

impl PerfMetric {
    pub fn as_str(&self) -> &'static str {
        match self {
            PerfMetric::Dsc => "dsc",
            PerfMetric::NegAvgFp => "neg-avgfp",
        }
    }
}

impl fmt::Display for PerfMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PerfMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dsc" => Ok(PerfMetric::Dsc),
            "neg-avgfp" => Ok(PerfMetric::NegAvgFp),
            other => Err(Error::UnknownName {
                what: "performance metric",
                value: other.to_string(),
            }),
        }
    }
}

fn perf_score(model: &ToyModel, image: &SynthImage, metric: PerfMetric) -> Result<f64> {
    let pred = model.predict(image);
    match metric {
        PerfMetric::Dsc => dsc(&pred, &image.mask),
        PerfMetric::NegAvgFp => Ok(-(avg_fp(&pred, &image.mask)? as f64)),
    }
}

/// Scores every test image with the detector and the downstream metric,
/// emitting a valid score table: cohort `id-test` for the holdout, one
/// cohort per corruption kind with severity recorded.
pub fn run_benchmark(
    world: &SynthWorld,
    model: &ToyModel,
    scorer: &dyn OodScorer,
    metric: PerfMetric,
) -> Result<ScoreTable> {
    let mut records = Vec::with_capacity(world.id_test.len() + world.ood.len());
    for (i, img) in world.id_test.iter().enumerate() {
        records.push(SampleRecord {
            sample_id: format!("{ID_COHORT}-{i:05}"),
            cohort: ID_COHORT.to_string(),
            ood_score: scorer.score(img),
            perf_score: perf_score(model, img, metric)?,
            severity: Some(0),
        });
    }
    for (i, img) in world.ood.iter().enumerate() {
        records.push(SampleRecord {
            sample_id: format!("{}-s{}-{i:05}", img.meta.corruption, img.meta.severity),
            cohort: img.meta.corruption.to_string(),
            ood_score: scorer.score(img),
            perf_score: perf_score(model, img, metric)?,
            severity: Some(img.meta.severity as u32),
        });
    }
    ScoreTable::from_records(records, Polarity::HigherIsAnomalous)
}
