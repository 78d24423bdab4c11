//! wasm-bindgen surface for the browser demo: one trained world exposing
//! the corruption explorer, the severity sweep and the threshold explorer.

use wasm_bindgen::prelude::*;

mod demo;

use demo::DemoState;

#[wasm_bindgen]
pub struct Demo {
    state: DemoState,
}

#[wasm_bindgen]
impl Demo {
    /// Trains the toy world from a seed; all demo randomness derives from
    /// it plus the per-call sample seeds.
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32) -> Result<Demo, JsValue> {
        DemoState::new(seed)
            .map(|state| Demo { state })
            .map_err(|e| JsValue::from_str(&e))
    }

    /// 64x64 RGBA bytes of a corrupted sample; overlay is
    /// `none` | `truth` | `prediction`.
    pub fn sample_view(
        &self,
        kind: &str,
        severity: u8,
        sample_seed: u32,
        overlay: &str,
    ) -> Result<Vec<u8>, JsValue> {
        demo::sample_view(&self.state, kind, severity, sample_seed, overlay)
            .map_err(|e| JsValue::from_str(&e))
    }

    /// JSON: dice, false-positive components, detection scores and the
    /// sample's fate under the entropy threshold at `n_percent`.
    pub fn sample_stats(
        &self,
        kind: &str,
        severity: u8,
        sample_seed: u32,
        n_percent: f64,
    ) -> Result<String, JsValue> {
        demo::sample_stats(&self.state, kind, severity, sample_seed, n_percent)
            .map_err(|e| JsValue::from_str(&e))
    }

    /// JSON severity sweep rows: EPD (thresholded and no-rejection) and
    /// 1-AUROC per severity 0..=5.
    pub fn severity_sweep(
        &self,
        kind: &str,
        scorer: &str,
        n_per_severity: usize,
        n_percent: f64,
    ) -> Result<String, JsValue> {
        demo::severity_sweep(&self.state, kind, scorer, n_per_severity, n_percent)
            .map_err(|e| JsValue::from_str(&e))
    }

    /// JSON score distributions for one cohort with the fitted threshold
    /// and the metrics it induces.
    pub fn threshold_view(
        &self,
        kind: &str,
        severity: u8,
        scorer: &str,
        n_samples: usize,
        n_percent: f64,
    ) -> Result<String, JsValue> {
        demo::threshold_view(&self.state, kind, severity, scorer, n_samples, n_percent)
            .map_err(|e| JsValue::from_str(&e))
    }
}
