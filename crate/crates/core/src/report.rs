//! Ranked method tables, severity sweeps and correlation matrices, with
//! JSON / Markdown / CSV renderings.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{
    aupr, auroc, bootstrap_ci, epd, fpr_at_tpr, fpr_at_tpr_plus, spearman, BootstrapInterval,
};
use crate::records::{compute_reference, ReferenceScore, ReferenceSource, ScoreTable};
use crate::thresholding::{fit_threshold, flag_scores, ThresholdPolicy};

/// One evaluated method: its score table, threshold policy and reference.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodRun {
    pub method_name: String,
    pub table: ScoreTable,
    pub policy: ThresholdPolicy,
    pub reference: ReferenceScore,
}

/// Metric driving a ranked report. The EPD variants only label which
/// downstream score the table carries; both evaluate the same drop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportMetric {
    EpdDsc,
    EpdNegAvgfp,
    Auroc,
    Aupr,
    FprN,
    FprNPlus,
}

impl ReportMetric {
    pub fn all() -> [ReportMetric; 6] {
        [
            ReportMetric::EpdDsc,
            ReportMetric::EpdNegAvgfp,
            ReportMetric::Auroc,
            ReportMetric::Aupr,
            ReportMetric::FprN,
            ReportMetric::FprNPlus,
        ]
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ReportMetric::EpdDsc => "epd-dsc",
            ReportMetric::EpdNegAvgfp => "epd-neg-avgfp",
            ReportMetric::Auroc => "auroc",
            ReportMetric::Aupr => "aupr",
            ReportMetric::FprN => "fpr-n",
            ReportMetric::FprNPlus => "fpr-n-plus",
        }
    }

    pub fn is_epd(&self) -> bool {
        matches!(self, ReportMetric::EpdDsc | ReportMetric::EpdNegAvgfp)
    }

    /// Ranking direction: drops and false-positive rates rank ascending,
    /// AUROC and AUPR descending.
    pub fn lower_is_better(&self) -> bool {
        matches!(
            self,
            ReportMetric::EpdDsc
                | ReportMetric::EpdNegAvgfp
                | ReportMetric::FprN
                | ReportMetric::FprNPlus
        )
    }
}

impl fmt::Display for ReportMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReportMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        for metric in ReportMetric::all() {
            if metric.as_str() == s {
                return Ok(metric);
            }
        }
        Err(Error::UnknownName {
            what: "report metric",
            value: s.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub n_percent: f64,
    pub metric: ReportMetric,
    pub seed: Option<u64>,
    pub version: String,
    /// Unix seconds; the one field exempt from byte-identical reruns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at_unix: Option<u64>,
}

/// Per-shift metric cells for every method, a mean row, and the ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedReport {
    pub metadata: ReportMetadata,
    /// OOD cohort tags in lexicographic order, then the reserved `mean` row.
    pub shifts: Vec<String>,
    pub methods: Vec<String>,
    /// `cells[shift][method]`.
    pub cells: Vec<Vec<f64>>,
    /// 1-based rank of each method within each row; ties broken by method
    /// name.
    pub per_shift_ranks: Vec<Vec<usize>>,
    /// Method names, best first by the mean row.
    pub ranking: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<Vec<Vec<BootstrapInterval>>>,
}

pub const MEAN_ROW: &str = "mean";

fn shared_shifts(runs: &[MethodRun]) -> Result<Vec<String>> {
    let reference: BTreeSet<String> = runs[0]
        .table
        .cohort_tags()
        .iter()
        .map(|s| s.to_string())
        .collect();
    for run in &runs[1..] {
        let tags: BTreeSet<String> = run
            .table
            .cohort_tags()
            .iter()
            .map(|s| s.to_string())
            .collect();
        if tags != reference {
            let missing: Vec<String> = reference
                .symmetric_difference(&tags)
                .cloned()
                .collect();
            return Err(Error::CohortMismatch { missing });
        }
    }
    if reference.contains(MEAN_ROW) {
        return Err(Error::InvalidReport(format!(
            "cohort name `{MEAN_ROW}` is reserved for the mean row"
        )));
    }
    Ok(reference.into_iter().collect())
}

fn cell_value(run: &MethodRun, shift: &str, metric: ReportMetric, n_percent: f64) -> Result<f64> {
    let id_scores = run.table.id_ood_scores();
    let cohort = run.table.cohort(shift);
    let ood_scores: Vec<f64> = cohort.iter().map(|r| r.ood_score).collect();
    match metric {
        ReportMetric::EpdDsc | ReportMetric::EpdNegAvgfp => {
            let threshold = fit_threshold(&id_scores, run.policy)?;
            let flags = flag_scores(&ood_scores, threshold);
            let perf: Vec<f64> = cohort.iter().map(|r| r.perf_score).collect();
            Ok(epd(&perf, &flags, run.reference)?.value)
        }
        ReportMetric::Auroc => auroc(&id_scores, &ood_scores),
        ReportMetric::Aupr => aupr(&id_scores, &ood_scores),
        ReportMetric::FprN => fpr_at_tpr(&id_scores, &ood_scores, n_percent),
        ReportMetric::FprNPlus => fpr_at_tpr_plus(&id_scores, &ood_scores, n_percent),
    }
}

fn row_ranks(row: &[f64], methods: &[String], lower_is_better: bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| {
        let value_order = if lower_is_better {
            row[a].total_cmp(&row[b])
        } else {
            row[b].total_cmp(&row[a])
        };
        value_order.then_with(|| methods[a].cmp(&methods[b]))
    });
    let mut ranks = vec![0usize; row.len()];
    for (position, &method) in order.iter().enumerate() {
        ranks[method] = position + 1;
    }
    ranks
}

/// Builds the per-shift table for `metric` across methods sharing one
/// cohort set. EPD cells honor each run's own policy and reference;
/// FPR cells use the report-level `n_percent`.
pub fn build_ranked_report(
    runs: &[MethodRun],
    metric: ReportMetric,
    n_percent: f64,
) -> Result<RankedReport> {
    if runs.is_empty() {
        return Err(Error::EmptyScores { what: "method runs" });
    }
    let mut names = BTreeSet::new();
    for run in runs {
        run.policy.validate()?;
        if !names.insert(run.method_name.clone()) {
            return Err(Error::InvalidReport(format!(
                "duplicate method name `{}`",
                run.method_name
            )));
        }
    }
    let shifts = shared_shifts(runs)?;
    if shifts.is_empty() {
        return Err(Error::EmptyScores { what: "ood cohorts" });
    }
    let methods: Vec<String> = runs.iter().map(|r| r.method_name.clone()).collect();

    let mut cells: Vec<Vec<f64>> = Vec::with_capacity(shifts.len() + 1);
    for shift in &shifts {
        let mut row = Vec::with_capacity(runs.len());
        for run in runs {
            row.push(cell_value(run, shift, metric, n_percent)?);
        }
        cells.push(row);
    }
    let mean_row: Vec<f64> = (0..runs.len())
        .map(|m| cells.iter().map(|row| row[m]).sum::<f64>() / shifts.len() as f64)
        .collect();
    cells.push(mean_row);

    let mut shifts_with_mean = shifts;
    shifts_with_mean.push(MEAN_ROW.to_string());

    let per_shift_ranks: Vec<Vec<usize>> = cells
        .iter()
        .map(|row| row_ranks(row, &methods, metric.lower_is_better()))
        .collect();

    let mean = cells.last().expect("mean row appended");
    let mut order: Vec<usize> = (0..methods.len()).collect();
    order.sort_by(|&a, &b| {
        let value_order = if metric.lower_is_better() {
            mean[a].total_cmp(&mean[b])
        } else {
            mean[b].total_cmp(&mean[a])
        };
        value_order.then_with(|| methods[a].cmp(&methods[b]))
    });
    let ranking: Vec<String> = order.into_iter().map(|i| methods[i].clone()).collect();

    Ok(RankedReport {
        metadata: ReportMetadata {
            n_percent,
            metric,
            seed: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
            generated_at_unix: None,
        },
        shifts: shifts_with_mean,
        methods,
        cells,
        per_shift_ranks,
        ranking,
        intervals: None,
    })
}

/// Percentile-bootstrap intervals for every cell of a ranked report,
/// including the mean row. Cell (row, method) draws from substream
/// (seed, row * methods + method); references computed from id-test are
/// re-derived inside each resample, external ones stay fixed.
pub fn bootstrap_report_intervals(
    runs: &[MethodRun],
    metric: ReportMetric,
    n_percent: f64,
    level: f64,
    n_resamples: usize,
    seed: u64,
) -> Result<Vec<Vec<BootstrapInterval>>> {
    let shifts = shared_shifts(runs)?;
    let mut rows: Vec<Vec<BootstrapInterval>> = Vec::with_capacity(shifts.len() + 1);
    let cell_metric = |run: &MethodRun, shift: Option<&str>, table: &ScoreTable| -> f64 {
        let reference = match run.reference.source {
            ReferenceSource::ComputedFromIdTest => {
                compute_reference(table).expect("resample preserves the id cohort")
            }
            ReferenceSource::ExternallySupplied => run.reference,
        };
        let probe = MethodRun {
            method_name: run.method_name.clone(),
            table: table.clone(),
            policy: run.policy,
            reference,
        };
        match shift {
            Some(shift) => {
                cell_value(&probe, shift, metric, n_percent).expect("resample preserves cohorts")
            }
            None => {
                let total: f64 = probe
                    .table
                    .cohort_tags()
                    .iter()
                    .map(|tag| {
                        cell_value(&probe, tag, metric, n_percent)
                            .expect("resample preserves cohorts")
                    })
                    .sum();
                total / probe.table.cohort_tags().len() as f64
            }
        }
    };
    for (row_index, shift) in shifts
        .iter()
        .map(|s| Some(s.as_str()))
        .chain(std::iter::once(None))
        .enumerate()
    {
        let mut row = Vec::with_capacity(runs.len());
        for (method_index, run) in runs.iter().enumerate() {
            let cell_seed = crate::seeds::substream(
                seed,
                (row_index * runs.len() + method_index) as u64,
            );
            row.push(bootstrap_ci(
                |table| cell_metric(run, shift, table),
                &run.table,
                level,
                n_resamples,
                cell_seed,
            )?);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// One severity group of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub severity: u32,
    pub epd: f64,
    pub one_minus_auroc: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeveritySweep {
    pub rows: Vec<SweepRow>,
    /// Severities absent between 0 and the observed maximum.
    pub warnings: Vec<String>,
}

/// Groups the run's OOD records by severity and scores each group against
/// the shared id-test set. The severity-0 group is whatever uncorrupted
/// holdout the table carries; it is disjoint from id-test by construction
/// of the benchmark, so its drop is measured rather than zero by fiat.
pub fn build_severity_sweep(run: &MethodRun) -> Result<SeveritySweep> {
    let ood = run.table.ood_records();
    if ood.is_empty() {
        return Err(Error::EmptyScores { what: "ood cohorts" });
    }
    let missing: Vec<String> = ood
        .iter()
        .filter(|r| r.severity.is_none())
        .map(|r| r.sample_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingSeverity {
            sample_ids: missing,
        });
    }
    let id_scores = run.table.id_ood_scores();
    let threshold = fit_threshold(&id_scores, run.policy)?;

    let mut groups: std::collections::BTreeMap<u32, Vec<&crate::records::SampleRecord>> =
        std::collections::BTreeMap::new();
    for rec in &ood {
        groups
            .entry(rec.severity.expect("checked above"))
            .or_default()
            .push(rec);
    }

    let mut rows = Vec::with_capacity(groups.len());
    for (&severity, records) in &groups {
        let scores: Vec<f64> = records.iter().map(|r| r.ood_score).collect();
        let perf: Vec<f64> = records.iter().map(|r| r.perf_score).collect();
        let flags = flag_scores(&scores, threshold);
        let drop = epd(&perf, &flags, run.reference)?;
        let roc = auroc(&id_scores, &scores)?;
        rows.push(SweepRow {
            severity,
            epd: drop.value,
            one_minus_auroc: 1.0 - roc,
            n_samples: records.len(),
        });
    }
    let max_severity = *groups.keys().last().expect("non-empty groups");
    let warnings: Vec<String> = (0..=max_severity)
        .filter(|s| !groups.contains_key(s))
        .map(|s| format!("severity {s} has no records; row omitted"))
        .collect();
    Ok(SeveritySweep { rows, warnings })
}

impl SeveritySweep {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("severity,epd,one_minus_auroc,n_samples\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.severity, row.epd, row.one_minus_auroc, row.n_samples
            ));
        }
        out
    }
}

/// Gated Spearman correlations per (method, shift); cells with fewer than
/// three samples are missing, not zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub methods: Vec<String>,
    pub shifts: Vec<String>,
    /// `cells[shift][method]`; `null` marks undersized cells.
    pub cells: Vec<Vec<Option<f64>>>,
}

pub fn build_correlation_matrix(runs: &[MethodRun]) -> Result<CorrelationMatrix> {
    if runs.is_empty() {
        return Err(Error::EmptyScores { what: "method runs" });
    }
    let shifts = shared_shifts(runs)?;
    let methods: Vec<String> = runs.iter().map(|r| r.method_name.clone()).collect();
    let mut cells = Vec::with_capacity(shifts.len());
    for shift in &shifts {
        let mut row = Vec::with_capacity(runs.len());
        for run in runs {
            let cohort = run.table.cohort(shift);
            if cohort.len() < 3 {
                row.push(None);
            } else {
                let scores: Vec<f64> = cohort.iter().map(|r| r.ood_score).collect();
                let perf: Vec<f64> = cohort.iter().map(|r| r.perf_score).collect();
                row.push(Some(spearman(&scores, &perf)?.gated_rho));
            }
        }
        cells.push(row);
    }
    Ok(CorrelationMatrix {
        methods,
        shifts,
        cells,
    })
}

impl CorrelationMatrix {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("shift,method,gated_rho\n");
        for (row, shift) in self.cells.iter().zip(&self.shifts) {
            for (cell, method) in row.iter().zip(&self.methods) {
                match cell {
                    Some(value) => out.push_str(&format!("{shift},{method},{value}\n")),
                    None => out.push_str(&format!("{shift},{method},\n")),
                }
            }
        }
        out
    }
}

impl RankedReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable report")
    }

    pub fn from_json(raw: &str) -> Result<Self> {
        serde_json::from_str(raw).map_err(|e| Error::InvalidReport(e.to_string()))
    }

    /// One row per (shift, method) cell.
    pub fn to_csv(&self) -> String {
        let with_intervals = self.intervals.is_some();
        let mut out = String::from(if with_intervals {
            "shift,method,metric,value,lower,upper\n"
        } else {
            "shift,method,metric,value\n"
        });
        for (row_index, shift) in self.shifts.iter().enumerate() {
            for (method_index, method) in self.methods.iter().enumerate() {
                let value = self.cells[row_index][method_index];
                match &self.intervals {
                    Some(intervals) => {
                        let ci = &intervals[row_index][method_index];
                        out.push_str(&format!(
                            "{shift},{method},{},{value},{},{}\n",
                            self.metadata.metric, ci.lower, ci.upper
                        ));
                    }
                    None => {
                        out.push_str(&format!(
                            "{shift},{method},{},{value}\n",
                            self.metadata.metric
                        ));
                    }
                }
            }
        }
        out
    }

    /// Markdown table in the two-block layout: the report's own metric,
    /// and optionally a companion AUROC block for side-by-side reading.
    pub fn to_markdown(&self, companion: Option<&RankedReport>) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# Method comparison ({}, N = {})\n\n",
            self.metadata.metric, self.metadata.n_percent
        ));
        self.push_markdown_block(&mut out);
        if let Some(companion) = companion {
            out.push('\n');
            companion.push_markdown_block(&mut out);
        }
        out
    }

    fn push_markdown_block(&self, out: &mut String) {
        let direction = if self.metadata.metric.lower_is_better() {
            "lower is better"
        } else {
            "higher is better"
        };
        out.push_str(&format!("## {} ({direction})\n\n", self.metadata.metric));
        out.push_str("| shift |");
        for method in &self.methods {
            out.push_str(&format!(" {method} |"));
        }
        out.push_str("\n|---|");
        for _ in &self.methods {
            out.push_str("---|");
        }
        out.push('\n');
        for (row_index, shift) in self.shifts.iter().enumerate() {
            out.push_str(&format!("| {shift} |"));
            for (method_index, _) in self.methods.iter().enumerate() {
                let value = self.cells[row_index][method_index];
                match &self.intervals {
                    Some(intervals) => {
                        let ci = &intervals[row_index][method_index];
                        out.push_str(&format!(
                            " {value:.4} [{:.4}, {:.4}] |",
                            ci.lower, ci.upper
                        ));
                    }
                    None => out.push_str(&format!(" {value:.4} |")),
                }
            }
            out.push('\n');
        }
        out.push_str("\nRanking: ");
        let ranked: Vec<String> = self
            .ranking
            .iter()
            .enumerate()
            .map(|(i, name)| format!("{}. {name}", i + 1))
            .collect();
        out.push_str(&ranked.join(", "));
        out.push('\n');
    }
}
