//! `pood eval`: ranked reports, correlation matrix and optional bootstrap
//! intervals from one method's score tables.

use std::path::PathBuf;

use clap::Args;

use pood::report::{
    bootstrap_report_intervals, build_correlation_matrix, build_ranked_report, MethodRun,
    RankedReport, ReportMetric,
};
use pood::{compute_reference, ReferenceScore, ThresholdPolicy};

use crate::common::{load_merged, now_unix, parse_polarity, stage, write_config_sidecar, write_text};
use crate::{usage, CliError};

const DEFAULT_BOOTSTRAP_LEVEL: f64 = 0.95;
pub const NO_OOD_METHOD: &str = "no-ood";

#[derive(Args)]
pub struct EvalArgs {
    /// Score table containing the id-test cohort
    #[arg(long)]
    id: PathBuf,
    /// Further score tables with OOD cohorts (repeatable)
    #[arg(long)]
    ood: Vec<PathBuf>,
    /// epd-dsc | epd-neg-avgfp | auroc | aupr | fpr-n | fpr-n-plus | all
    #[arg(long)]
    metric: String,
    /// TPR floor in percent for thresholding and FPR metrics
    #[arg(long, default_value_t = pood::DEFAULT_N_PERCENT)]
    tpr: f64,
    /// Externally supplied reference score S0 (e.g. a baseline model's
    /// id-test performance)
    #[arg(long)]
    reference_score: Option<f64>,
    /// Evaluate the no-rejection policy instead of the TPR threshold
    #[arg(long)]
    no_ood: bool,
    /// Bootstrap resample count for per-cell confidence intervals
    #[arg(long)]
    bootstrap: Option<usize>,
    /// Bootstrap confidence level (default 0.95, requires --bootstrap)
    #[arg(long)]
    level: Option<f64>,
    /// Seed for the bootstrap substreams
    #[arg(long)]
    seed: Option<u64>,
    /// higher-is-anomalous | lower-is-anomalous
    #[arg(long, default_value = "higher-is-anomalous")]
    polarity: String,
    /// csv | json; default follows each file's extension
    #[arg(long)]
    format: Option<String>,
    /// Method display name (default: the id file stem)
    #[arg(long)]
    method_name: Option<String>,
    /// Which EPD label `--metric all` uses: dsc | neg-avgfp
    #[arg(long, default_value = "dsc")]
    perf: String,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

fn metric_list(raw: &str, perf: &str) -> Result<Vec<ReportMetric>, CliError> {
    if raw == "all" {
        let epd = match perf {
            "dsc" => ReportMetric::EpdDsc,
            "neg-avgfp" => ReportMetric::EpdNegAvgfp,
            other => return Err(usage(format!("unknown --perf `{other}`"))),
        };
        return Ok(vec![
            epd,
            ReportMetric::Auroc,
            ReportMetric::Aupr,
            ReportMetric::FprN,
            ReportMetric::FprNPlus,
        ]);
    }
    Ok(vec![raw
        .parse::<ReportMetric>()
        .map_err(|e| usage(e.to_string()))?])
}

pub fn run(args: EvalArgs) -> Result<(), CliError> {
    let metrics = metric_list(&args.metric, &args.perf)?;
    let polarity = parse_polarity(&args.polarity)?;
    let policy = if args.no_ood {
        ThresholdPolicy::NoOod
    } else {
        ThresholdPolicy::TprAtN { n_percent: args.tpr }
    };
    policy.validate().map_err(|e| usage(e.to_string()))?;
    let level = match (args.bootstrap, args.level) {
        (None, Some(_)) => return Err(usage("--level requires --bootstrap")),
        (_, level) => level.unwrap_or(DEFAULT_BOOTSTRAP_LEVEL),
    };
    if args.bootstrap.is_some() && args.seed.is_none() {
        return Err(usage("--bootstrap draws randomness; pass an explicit --seed"));
    }
    if !(0.0..1.0).contains(&level) || level <= 0.0 {
        return Err(usage(format!("--level must lie in (0, 1), got {level}")));
    }

    let table = load_merged(&args.id, &args.ood, args.format.as_deref(), polarity)?;
    if table.cohort_tags().is_empty() {
        return Err(CliError::Data(
            "no OOD cohorts found; nothing to evaluate".to_string(),
        ));
    }
    let reference = match args.reference_score {
        Some(s0) => ReferenceScore::external(s0)?,
        None => compute_reference(&table)?,
    };
    stage(format!("reference score s0 = {}", reference.s0));

    let method_name = args
        .method_name
        .clone()
        .or_else(|| {
            args.id
                .file_stem()
                .map(|stem| stem.to_string_lossy().into_owned())
        })
        .unwrap_or_else(|| "method".to_string());
    let main_run = MethodRun {
        method_name: method_name.clone(),
        table: table.clone(),
        policy,
        reference,
    };

    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", args.out.display())))?;

    for metric in &metrics {
        // EPD tables carry the no-rejection baseline as an extra method row;
        // detection metrics describe the scores themselves, where that row
        // is meaningless.
        let runs: Vec<MethodRun> =
            if metric.is_epd() && !args.no_ood && method_name != NO_OOD_METHOD {
                vec![
                    main_run.clone(),
                    MethodRun {
                        method_name: NO_OOD_METHOD.to_string(),
                        table: table.clone(),
                        policy: ThresholdPolicy::NoOod,
                        reference,
                    },
                ]
            } else {
                vec![main_run.clone()]
            };
        let mut report = build_ranked_report(&runs, *metric, args.tpr)?;
        report.metadata.seed = args.seed;
        report.metadata.generated_at_unix = Some(now_unix());
        if let Some(resamples) = args.bootstrap {
            stage(format!(
                "bootstrapping {resamples} resamples per cell at level {level}"
            ));
            report.intervals = Some(bootstrap_report_intervals(
                &runs,
                *metric,
                args.tpr,
                level,
                resamples,
                args.seed.expect("checked above"),
            )?);
        }
        let companion: Option<RankedReport> = if metric.is_epd() {
            Some(build_ranked_report(
                std::slice::from_ref(&main_run),
                ReportMetric::Auroc,
                args.tpr,
            )?)
        } else {
            None
        };
        let base = args.out.join(format!("report-{metric}"));
        write_text(&base.with_extension("json"), &report.to_json())?;
        write_text(
            &base.with_extension("md"),
            &report.to_markdown(companion.as_ref()),
        )?;
        write_text(&base.with_extension("csv"), &report.to_csv())?;
    }

    let matrix = build_correlation_matrix(std::slice::from_ref(&main_run))?;
    let matrix_json = serde_json::to_string_pretty(&matrix).expect("serializable matrix");
    write_text(&args.out.join("correlations.json"), &matrix_json)?;
    write_text(&args.out.join("correlations.csv"), &matrix.to_csv())?;

    write_config_sidecar(
        &args.out.join("run-config.json"),
        "eval",
        serde_json::json!({
            "bootstrap": args.bootstrap,
            "format": args.format,
            "id": args.id.display().to_string(),
            "level": args.bootstrap.map(|_| level),
            "method_name": method_name,
            "metric": args.metric,
            "no_ood": args.no_ood,
            "ood": args.ood.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            "perf": args.perf,
            "polarity": polarity.to_string(),
            "reference_score": args.reference_score,
            "seed": args.seed,
            "tpr": args.tpr,
        }),
    )?;
    Ok(())
}
