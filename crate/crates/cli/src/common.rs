//! Shared plumbing: table loading, stage logs and config sidecars.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use pood::records::write_atomic;
use pood::{ingest_table, Polarity, ScoreTable, TableFormat};

use crate::CliError;

pub fn stage(message: impl AsRef<str>) {
    eprintln!("[pood] {}", message.as_ref());
}

pub fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn parse_polarity(raw: &str) -> Result<Polarity, CliError> {
    raw.parse::<Polarity>()
        .map_err(|e| crate::usage(e.to_string()))
}

/// Table format from `--format` or, failing that, the file extension;
/// everything that is not `.json` reads as CSV.
pub fn table_format(path: &Path, explicit: Option<&str>) -> Result<TableFormat, CliError> {
    match explicit {
        Some(raw) => raw
            .parse::<TableFormat>()
            .map_err(|e| crate::usage(e.to_string())),
        None => Ok(
            match path.extension().and_then(|e| e.to_str()) {
                Some("json") => TableFormat::Json,
                _ => TableFormat::Csv,
            },
        ),
    }
}

pub fn load_table(
    path: &Path,
    format: Option<&str>,
    polarity: Polarity,
) -> Result<ScoreTable, CliError> {
    let format = table_format(path, format)?;
    let table = ingest_table(path, format, polarity)?;
    stage(format!(
        "ingested {} records from {}",
        table.len(),
        path.display()
    ));
    Ok(table)
}

/// Loads and merges one id table plus any number of OOD tables into a
/// single validated score table.
pub fn load_merged(
    id_path: &Path,
    ood_paths: &[PathBuf],
    format: Option<&str>,
    polarity: Polarity,
) -> Result<ScoreTable, CliError> {
    let mut records = load_table(id_path, format, polarity)?.records().to_vec();
    for path in ood_paths {
        records.extend(load_table(path, format, polarity)?.records().iter().cloned());
    }
    // Per-file ingestion already normalized polarity.
    let table = ScoreTable::from_records(records, Polarity::HigherIsAnomalous)?;
    Ok(table)
}

pub fn write_text(path: &Path, contents: &str) -> Result<(), CliError> {
    write_atomic(path, contents.as_bytes())?;
    stage(format!("wrote {}", path.display()));
    Ok(())
}

/// Sidecar with the resolved configuration and tool version, for outputs
/// whose own schema has no room to embed them.
pub fn write_config_sidecar(
    path: &Path,
    command: &str,
    flags: serde_json::Value,
) -> Result<(), CliError> {
    let config = serde_json::json!({
        "command": command,
        "flags": flags,
        "generated_at_unix": now_unix(),
        "version": env!("CARGO_PKG_VERSION"),
    });
    let pretty = serde_json::to_string_pretty(&config).expect("serializable config");
    write_text(path, &pretty)
}
