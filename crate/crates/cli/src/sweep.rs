//! `pood sweep`: per-severity EPD and 1-AUROC from a severity-carrying
//! score table.

use std::path::PathBuf;

use clap::Args;

use pood::report::{build_severity_sweep, MethodRun};
use pood::{compute_reference, ThresholdPolicy};

use crate::common::{load_table, parse_polarity, stage, write_config_sidecar, write_text};
use crate::{usage, CliError};

#[derive(Args)]
pub struct SweepArgs {
    /// Score table with a severity column
    #[arg(long)]
    table: PathBuf,
    /// TPR floor in percent
    #[arg(long, default_value_t = pood::DEFAULT_N_PERCENT)]
    tpr: f64,
    /// Sweep the no-rejection policy instead of the TPR threshold
    #[arg(long)]
    no_ood: bool,
    /// higher-is-anomalous | lower-is-anomalous
    #[arg(long, default_value = "higher-is-anomalous")]
    polarity: String,
    /// csv | json; default follows the file extension
    #[arg(long)]
    format: Option<String>,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: SweepArgs) -> Result<(), CliError> {
    let polarity = parse_polarity(&args.polarity)?;
    let policy = if args.no_ood {
        ThresholdPolicy::NoOod
    } else {
        ThresholdPolicy::TprAtN { n_percent: args.tpr }
    };
    policy.validate().map_err(|e| usage(e.to_string()))?;

    let table = load_table(&args.table, args.format.as_deref(), polarity)?;
    let reference = compute_reference(&table)?;
    let run = MethodRun {
        method_name: "sweep".to_string(),
        table,
        policy,
        reference,
    };
    let sweep = build_severity_sweep(&run)?;
    for warning in &sweep.warnings {
        stage(format!("warning: {warning}"));
    }
    write_text(&args.out, &sweep.to_csv())?;

    write_config_sidecar(
        &args.out.with_extension("meta.json"),
        "sweep",
        serde_json::json!({
            "no_ood": args.no_ood,
            "polarity": polarity.to_string(),
            "table": args.table.display().to_string(),
            "tpr": args.tpr,
        }),
    )?;
    Ok(())
}
