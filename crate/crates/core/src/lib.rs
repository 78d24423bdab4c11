//! Performance-aware evaluation of out-of-distribution detection.
//!
//! Classical OOD metrics score a detector on an artificial in/out label.
//! This crate scores it by what it protects: the expected performance drop
//! (EPD) a rejection policy leaves on a downstream segmentation task,
//! alongside AUROC, AUPR and FPR-at-TPR variants for comparison. A
//! self-contained synthetic benchmark (toy images, severity-graded
//! corruptions, a pixelwise segmenter and two detection scorers) exercises
//! the whole pipeline at desk scale.

pub mod error;
pub mod metrics;
pub mod records;
pub mod report;
pub mod seeds;
pub mod synth;
pub mod thresholding;

pub use error::{Error, Result};
pub use metrics::{
    aupr, auroc, bootstrap_ci, detection_metrics, epd, fpr_at_tpr, fpr_at_tpr_plus, spearman,
    BootstrapInterval, CorrelationResult, DetectionMetrics, EpdResult, CORRELATION_GATE,
};
pub use records::{
    compute_reference, ingest_table, Polarity, ReferenceScore, ReferenceSource, SampleRecord,
    ScoreTable, TableFormat, ID_COHORT,
};
pub use report::{
    bootstrap_report_intervals, build_correlation_matrix, build_ranked_report,
    build_severity_sweep, CorrelationMatrix, MethodRun, RankedReport, ReportMetadata,
    ReportMetric, SeveritySweep, SweepRow, MEAN_ROW,
};
pub use thresholding::{
    decide, fit_threshold, flag_scores, Decision, Threshold, ThresholdPolicy, DEFAULT_N_PERCENT,
};
