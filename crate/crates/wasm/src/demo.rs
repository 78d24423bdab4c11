//! Demo state and operations, kept free of browser types so they run (and
//! test) on any target.

use serde::Serialize;

use pood::records::{compute_reference, Polarity, SampleRecord, ScoreTable, ID_COHORT};
use pood::report::{build_severity_sweep, MethodRun};
use pood::seeds::substream;
use pood::synth::{
    corrupt, dsc, avg_fp, fit_toy_model, render_image, CorruptionKind, EntropyScorer, IhfScorer,
    Mask, OodScorer, SynthImage, ToyModel, MAX_SEVERITY,
};
use pood::thresholding::{fit_threshold, flag_scores, ThresholdPolicy};
use pood::{auroc, epd};

const SIDE: usize = 64;
const N_TRAIN: usize = 20;
const N_ID_TEST: usize = 64;
/// Salt separating interactive sample seeds from the training world.
const SAMPLE_STREAM: u64 = 0x5A11;

pub struct DemoState {
    seed: u64,
    model: ToyModel,
    entropy: EntropyScorer,
    ihf: IhfScorer,
    id_images: Vec<SynthImage>,
}

impl DemoState {
    pub fn new(seed: u32) -> Result<DemoState, String> {
        let seed = seed as u64;
        let train: Vec<SynthImage> = (0..N_TRAIN)
            .map(|i| render_image(SIDE, SIDE, substream(seed, i as u64)))
            .collect();
        let id_images: Vec<SynthImage> = (0..N_ID_TEST)
            .map(|i| render_image(SIDE, SIDE, substream(seed, (N_TRAIN + i) as u64)))
            .collect();
        let model = fit_toy_model(&train).map_err(|e| e.to_string())?;
        let ihf = IhfScorer::fit(&train).map_err(|e| e.to_string())?;
        Ok(DemoState {
            seed,
            model,
            entropy: EntropyScorer::new(model),
            ihf,
            id_images,
        })
    }

    fn scorer(&self, name: &str) -> Result<&dyn OodScorer, String> {
        match name {
            "entropy" => Ok(&self.entropy),
            "ihf" => Ok(&self.ihf),
            other => Err(format!("unknown scorer `{other}`")),
        }
    }

    fn sample(&self, kind: &str, severity: u8, sample_seed: u32) -> Result<SynthImage, String> {
        let kind: CorruptionKind = kind.parse().map_err(|e: pood::Error| e.to_string())?;
        let render_seed = substream(SAMPLE_STREAM, sample_seed as u64);
        let base = render_image(SIDE, SIDE, render_seed);
        corrupt(&base, kind, severity, substream(render_seed, 1)).map_err(|e| e.to_string())
    }
}

fn mask_boundary(mask: &Mask) -> Vec<bool> {
    let (h, w) = (mask.height(), mask.width());
    let mut boundary = vec![false; h * w];
    for y in 0..h {
        for x in 0..w {
            if !mask.get(y, x) {
                continue;
            }
            let mut edge = x == 0 || y == 0 || x == w - 1 || y == h - 1;
            if !edge {
                edge = !mask.get(y - 1, x)
                    || !mask.get(y + 1, x)
                    || !mask.get(y, x - 1)
                    || !mask.get(y, x + 1);
            }
            boundary[y * w + x] = edge;
        }
    }
    boundary
}

/// RGBA view of a sample: grayscale intensities with an optional contour of
/// the ground truth (green) or the model prediction (red).
pub fn sample_view(
    state: &DemoState,
    kind: &str,
    severity: u8,
    sample_seed: u32,
    overlay: &str,
) -> Result<Vec<u8>, String> {
    let image = state.sample(kind, severity, sample_seed)?;
    let contour: Option<(Vec<bool>, [u8; 3])> = match overlay {
        "none" => None,
        "truth" => Some((mask_boundary(&image.mask), [60, 220, 100])),
        "prediction" => Some((mask_boundary(&state.model.predict(&image)), [235, 80, 80])),
        other => return Err(format!("unknown overlay `{other}`")),
    };
    let mut rgba = Vec::with_capacity(image.pixels.len() * 4);
    for (i, &v) in image.pixels.iter().enumerate() {
        let gray = (v * 255.0).round().clamp(0.0, 255.0) as u8;
        let mut pixel = [gray, gray, gray, 255];
        if let Some((boundary, color)) = &contour {
            if boundary[i] {
                pixel = [color[0], color[1], color[2], 255];
            }
        }
        rgba.extend_from_slice(&pixel);
    }
    Ok(rgba)
}

#[derive(Serialize)]
struct SampleStats {
    dsc: f64,
    avg_fp: usize,
    entropy_score: f64,
    ihf_score: f64,
    tau_entropy: f64,
    retained_by_entropy: bool,
}

/// Per-sample segmentation quality and detection scores, plus where the
/// sample falls against the entropy threshold at `n_percent`.
pub fn sample_stats(
    state: &DemoState,
    kind: &str,
    severity: u8,
    sample_seed: u32,
    n_percent: f64,
) -> Result<String, String> {
    let image = state.sample(kind, severity, sample_seed)?;
    let pred = state.model.predict(&image);
    let id_scores: Vec<f64> = state
        .id_images
        .iter()
        .map(|img| state.entropy.score(img))
        .collect();
    let threshold = fit_threshold(&id_scores, ThresholdPolicy::TprAtN { n_percent })
        .map_err(|e| e.to_string())?;
    let entropy_score = state.entropy.score(&image);
    let stats = SampleStats {
        dsc: dsc(&pred, &image.mask).map_err(|e| e.to_string())?,
        avg_fp: avg_fp(&pred, &image.mask).map_err(|e| e.to_string())?,
        entropy_score,
        ihf_score: state.ihf.score(&image),
        tau_entropy: threshold.tau,
        retained_by_entropy: entropy_score <= threshold.tau,
    };
    serde_json::to_string(&stats).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct SweepRowOut {
    severity: u32,
    epd: f64,
    epd_no_ood: f64,
    one_minus_auroc: f64,
    n_samples: usize,
}

#[derive(Serialize)]
struct SweepOut {
    kind: String,
    scorer: String,
    n_percent: f64,
    rows: Vec<SweepRowOut>,
}

/// Severity sweep over fresh images: EPD under the TPR threshold, EPD with
/// no rejection, and 1-AUROC per severity.
pub fn severity_sweep(
    state: &DemoState,
    kind: &str,
    scorer_name: &str,
    n_per_severity: usize,
    n_percent: f64,
) -> Result<String, String> {
    let corruption: CorruptionKind = kind.parse().map_err(|e: pood::Error| e.to_string())?;
    if corruption == CorruptionKind::None {
        return Err("pick a real corruption kind for the sweep".to_string());
    }
    let n_per_severity = n_per_severity.clamp(10, 400);
    let scorer = state.scorer(scorer_name)?;

    let mut records = Vec::new();
    for (i, img) in state.id_images.iter().enumerate() {
        records.push(SampleRecord {
            sample_id: format!("{ID_COHORT}-{i:04}"),
            cohort: ID_COHORT.to_string(),
            ood_score: scorer.score(img),
            perf_score: dsc(&state.model.predict(img), &img.mask).map_err(|e| e.to_string())?,
            severity: Some(0),
        });
    }
    let mut stream = 0u64;
    for severity in 0..=MAX_SEVERITY {
        for i in 0..n_per_severity {
            let render_seed = substream(state.seed ^ 0xD15C, stream);
            stream += 1;
            let base = render_image(SIDE, SIDE, render_seed);
            let image = corrupt(&base, corruption, severity, substream(render_seed, 1))
                .map_err(|e| e.to_string())?;
            records.push(SampleRecord {
                sample_id: format!("{corruption}-s{severity}-{i:04}"),
                cohort: corruption.to_string(),
                ood_score: scorer.score(&image),
                perf_score: dsc(&state.model.predict(&image), &image.mask)
                    .map_err(|e| e.to_string())?,
                severity: Some(severity as u32),
            });
        }
    }
    let table =
        ScoreTable::from_records(records, Polarity::HigherIsAnomalous).map_err(|e| e.to_string())?;
    let reference = compute_reference(&table).map_err(|e| e.to_string())?;
    let sweep_for = |policy: ThresholdPolicy| {
        build_severity_sweep(&MethodRun {
            method_name: scorer_name.to_string(),
            table: table.clone(),
            policy,
            reference,
        })
        .map_err(|e| e.to_string())
    };
    let thresholded = sweep_for(ThresholdPolicy::TprAtN { n_percent })?;
    let unrejected = sweep_for(ThresholdPolicy::NoOod)?;

    let rows = thresholded
        .rows
        .iter()
        .zip(&unrejected.rows)
        .map(|(t, n)| SweepRowOut {
            severity: t.severity,
            epd: t.epd,
            epd_no_ood: n.epd,
            one_minus_auroc: t.one_minus_auroc,
            n_samples: t.n_samples,
        })
        .collect();
    let out = SweepOut {
        kind: corruption.to_string(),
        scorer: scorer_name.to_string(),
        n_percent,
        rows,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct ThresholdOut {
    id_scores: Vec<f64>,
    ood_scores: Vec<f64>,
    tau: f64,
    achieved_tpr: f64,
    fpr: f64,
    auroc: f64,
    epd: f64,
    epd_no_ood: f64,
}

/// Raw score distributions for one corrupted cohort against the id set,
/// with the threshold and the metrics it induces.
pub fn threshold_view(
    state: &DemoState,
    kind: &str,
    severity: u8,
    scorer_name: &str,
    n_samples: usize,
    n_percent: f64,
) -> Result<String, String> {
    let corruption: CorruptionKind = kind.parse().map_err(|e: pood::Error| e.to_string())?;
    let n_samples = n_samples.clamp(10, 400);
    let scorer = state.scorer(scorer_name)?;

    let id_scores: Vec<f64> = state.id_images.iter().map(|img| scorer.score(img)).collect();
    let mut ood_scores = Vec::with_capacity(n_samples);
    let mut perf = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let render_seed = substream(state.seed ^ 0x7A0, i as u64);
        let base = render_image(SIDE, SIDE, render_seed);
        let image = corrupt(&base, corruption, severity, substream(render_seed, 1))
            .map_err(|e| e.to_string())?;
        ood_scores.push(scorer.score(&image));
        perf.push(dsc(&state.model.predict(&image), &image.mask).map_err(|e| e.to_string())?);
    }

    let id_perf: Vec<f64> = state
        .id_images
        .iter()
        .map(|img| dsc(&state.model.predict(img), &img.mask))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let s0 = id_perf.iter().sum::<f64>() / id_perf.len() as f64;
    let reference = pood::ReferenceScore::external(s0).map_err(|e| e.to_string())?;

    let threshold = fit_threshold(&id_scores, ThresholdPolicy::TprAtN { n_percent })
        .map_err(|e| e.to_string())?;
    let flags = flag_scores(&ood_scores, threshold);
    let retained = flags.iter().filter(|&&f| f).count();
    let out = ThresholdOut {
        tau: threshold.tau,
        achieved_tpr: threshold.achieved_tpr,
        fpr: retained as f64 / ood_scores.len() as f64,
        auroc: auroc(&id_scores, &ood_scores).map_err(|e| e.to_string())?,
        epd: epd(&perf, &flags, reference).map_err(|e| e.to_string())?.value,
        epd_no_ood: epd(&perf, &vec![true; perf.len()], reference)
            .map_err(|e| e.to_string())?
            .value,
        id_scores,
        ood_scores,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_builds_and_views_render() {
        let state = DemoState::new(7).unwrap();
        for overlay in ["none", "truth", "prediction"] {
            let rgba = sample_view(&state, "gaussian-noise", 3, 5, overlay).unwrap();
            assert_eq!(rgba.len(), SIDE * SIDE * 4);
        }
        assert!(sample_view(&state, "gaussian-noise", 3, 5, "bogus").is_err());
        assert!(sample_view(&state, "speckle", 3, 5, "none").is_err());
    }

    #[test]
    fn stats_parse_and_are_plausible() {
        let state = DemoState::new(7).unwrap();
        let raw = sample_stats(&state, "none", 0, 11, 95.0).unwrap();
        let json: serde_json::Value = serde_json::from_str(&raw).unwrap();
        let dice = json["dsc"].as_f64().unwrap();
        assert!(dice > 0.9, "clean sample dice {dice}");
        assert!(json["retained_by_entropy"].as_bool().unwrap());
    }

    #[test]
    fn sweep_has_six_rows_and_ramps() {
        let state = DemoState::new(3).unwrap();
        let raw = severity_sweep(&state, "gaussian-noise", "entropy", 20, 95.0).unwrap();
        let json: serde_json::Value = serde_json::from_str(&raw).unwrap();
        let rows = json["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 6);
        let last_no_ood = rows[5]["epd_no_ood"].as_f64().unwrap();
        assert!(last_no_ood > 0.1, "no-ood curve should ramp, got {last_no_ood}");
    }

    #[test]
    fn threshold_view_is_consistent() {
        let state = DemoState::new(5).unwrap();
        let raw = threshold_view(&state, "gaussian-noise", 2, "entropy", 30, 95.0).unwrap();
        let json: serde_json::Value = serde_json::from_str(&raw).unwrap();
        assert_eq!(json["id_scores"].as_array().unwrap().len(), N_ID_TEST);
        assert_eq!(json["ood_scores"].as_array().unwrap().len(), 30);
        let tpr = json["achieved_tpr"].as_f64().unwrap();
        assert!(tpr >= 0.95);
    }

    #[test]
    fn views_are_deterministic() {
        let a = DemoState::new(9).unwrap();
        let b = DemoState::new(9).unwrap();
        assert_eq!(
            sample_view(&a, "blur", 4, 2, "prediction").unwrap(),
            sample_view(&b, "blur", 4, 2, "prediction").unwrap()
        );
        assert_eq!(
            severity_sweep(&a, "occlusion", "ihf", 15, 90.0).unwrap(),
            severity_sweep(&b, "occlusion", "ihf", 15, 90.0).unwrap()
        );
    }
}
