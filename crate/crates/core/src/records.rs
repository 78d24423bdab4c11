//! Canonical data model for evaluation inputs: sample records, validated
//! score tables and the reference score used as the drop baseline.
//!
//! A score table holds one detection method's output over one evaluation
//! split: an `id-test` cohort of in-distribution samples plus any number of
//! named OOD cohorts. Scores are normalized at ingestion so that higher
//! `ood_score` always means more anomalous.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reserved cohort tag marking in-distribution test samples. Case-sensitive.
pub const ID_COHORT: &str = "id-test";

/// One evaluated image: identifiers, detection score and downstream
/// performance score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample_id: String,
    pub cohort: String,
    /// Higher means more anomalous once the table is normalized.
    pub ood_score: f64,
    /// Downstream performance, e.g. Dice in `[0, 1]` or a negated
    /// false-positive count in `(-inf, 0]`.
    pub perf_score: f64,
    /// Corruption severity; 0 denotes uncorrupted data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub severity: Option<u32>,
}

impl SampleRecord {
    pub fn is_id(&self) -> bool {
        self.cohort == ID_COHORT
    }
}

/// Direction of the raw detection scores in an input file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    HigherIsAnomalous,
    LowerIsAnomalous,
}

impl FromStr for Polarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "higher-is-anomalous" => Ok(Polarity::HigherIsAnomalous),
            "lower-is-anomalous" => Ok(Polarity::LowerIsAnomalous),
            other => Err(Error::UnknownName {
                what: "polarity",
                value: other.to_string(),
            }),
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarity::HigherIsAnomalous => write!(f, "higher-is-anomalous"),
            Polarity::LowerIsAnomalous => write!(f, "lower-is-anomalous"),
        }
    }
}

/// Input file format for score tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            other => Err(Error::UnknownName {
                what: "table format",
                value: other.to_string(),
            }),
        }
    }
}

/// Validated, polarity-normalized collection of sample records.
///
/// Immutable after construction; cohort lookups are precomputed. Every
/// record belongs to exactly one cohort: `id-test` or a named OOD shift.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    records: Vec<SampleRecord>,
    id_index: Vec<usize>,
    ood_index: BTreeMap<String, Vec<usize>>,
}

impl ScoreTable {
    /// Validates records and normalizes polarity to higher-is-anomalous.
    /// Row order is preserved.
    pub fn from_records(mut records: Vec<SampleRecord>, polarity: Polarity) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for rec in &records {
            if !rec.ood_score.is_finite() {
                return Err(Error::InvalidRecord {
                    sample_id: rec.sample_id.clone(),
                    reason: "ood_score is not finite".to_string(),
                });
            }
            if !rec.perf_score.is_finite() {
                return Err(Error::InvalidRecord {
                    sample_id: rec.sample_id.clone(),
                    reason: "perf_score is not finite".to_string(),
                });
            }
            if !seen.insert(rec.sample_id.clone()) {
                return Err(Error::DuplicateSampleId {
                    sample_id: rec.sample_id.clone(),
                });
            }
        }
        if polarity == Polarity::LowerIsAnomalous {
            for rec in &mut records {
                rec.ood_score = -rec.ood_score;
            }
        }
        Ok(Self::index(records))
    }

    /// Builds a table without the uniqueness check. Bootstrap resamples
    /// legitimately repeat records.
    fn from_records_unchecked(records: Vec<SampleRecord>) -> Self {
        Self::index(records)
    }

    fn index(records: Vec<SampleRecord>) -> Self {
        let mut id_index = Vec::new();
        let mut ood_index: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, rec) in records.iter().enumerate() {
            if rec.is_id() {
                id_index.push(i);
            } else {
                ood_index.entry(rec.cohort.clone()).or_default().push(i);
            }
        }
        ScoreTable {
            records,
            id_index,
            ood_index,
        }
    }

    pub fn records(&self) -> &[SampleRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// In-distribution test records, in row order.
    pub fn id_cohort(&self) -> Vec<&SampleRecord> {
        self.id_index.iter().map(|&i| &self.records[i]).collect()
    }

    pub fn id_ood_scores(&self) -> Vec<f64> {
        self.id_index
            .iter()
            .map(|&i| self.records[i].ood_score)
            .collect()
    }

    pub fn id_perf_scores(&self) -> Vec<f64> {
        self.id_index
            .iter()
            .map(|&i| self.records[i].perf_score)
            .collect()
    }

    /// OOD cohort tags in lexicographic order.
    pub fn cohort_tags(&self) -> Vec<&str> {
        self.ood_index.keys().map(String::as_str).collect()
    }

    /// Records of one OOD cohort, in row order. Empty when the tag is absent.
    pub fn cohort(&self, tag: &str) -> Vec<&SampleRecord> {
        self.ood_index
            .get(tag)
            .map(|idx| idx.iter().map(|&i| &self.records[i]).collect())
            .unwrap_or_default()
    }

    /// All OOD records in row order, across cohorts.
    pub fn ood_records(&self) -> Vec<&SampleRecord> {
        self.records.iter().filter(|r| !r.is_id()).collect()
    }

    /// Resamples the id cohort and each OOD cohort independently with
    /// replacement, preserving cohort sizes.
    pub(crate) fn resampled(&self, rng: &mut impl Rng) -> ScoreTable {
        let mut records = Vec::with_capacity(self.records.len());
        for index in std::iter::once(&self.id_index).chain(self.ood_index.values()) {
            for _ in 0..index.len() {
                let pick = index[rng.gen_range(0..index.len())];
                records.push(self.records[pick].clone());
            }
        }
        ScoreTable::from_records_unchecked(records)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let bytes = self.to_csv_bytes();
        write_atomic(path, &bytes)
    }

    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let with_severity = self.records.iter().any(|r| r.severity.is_some());
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["sample_id", "cohort", "ood_score", "perf_score"];
        if with_severity {
            header.push("severity");
        }
        wtr.write_record(&header).expect("in-memory write");
        for rec in &self.records {
            let mut row = vec![
                rec.sample_id.clone(),
                rec.cohort.clone(),
                format!("{}", rec.ood_score),
                format!("{}", rec.perf_score),
            ];
            if with_severity {
                row.push(rec.severity.map(|s| s.to_string()).unwrap_or_default());
            }
            wtr.write_record(&row).expect("in-memory write");
        }
        wtr.into_inner().expect("in-memory flush")
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(&self.records).expect("serializable records");
        write_atomic(path, json.as_bytes())
    }
}

/// Writes a file through a temporary sibling plus rename, so rerun outputs
/// are never observed half-written.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp{}",
        path.extension().and_then(|e| e.to_str()).unwrap_or(""),
        std::process::id()
    ));
    let mut file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    file.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    file.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads and validates a score table from disk, normalizing polarity.
pub fn ingest_table(
    path: impl AsRef<Path>,
    format: TableFormat,
    polarity: Polarity,
) -> Result<ScoreTable> {
    let path = path.as_ref();
    let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
    let records = match format {
        TableFormat::Csv => parse_csv(path, &raw)?,
        TableFormat::Json => parse_json(path, &raw)?,
    };
    if records.is_empty() {
        return Err(Error::EmptyInput {
            path: path.to_path_buf(),
        });
    }
    ScoreTable::from_records(records, polarity)
}

const REQUIRED_COLUMNS: [&str; 4] = ["sample_id", "cohort", "ood_score", "perf_score"];

fn parse_csv(path: &Path, raw: &[u8]) -> Result<Vec<SampleRecord>> {
    if raw.is_empty() {
        return Err(Error::EmptyInput {
            path: path.to_path_buf(),
        });
    }
    let mut rdr = csv::ReaderBuilder::new().from_reader(raw);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?
        .clone();
    let mut positions: HashMap<&str, usize> = HashMap::new();
    for (i, name) in headers.iter().enumerate() {
        positions.insert(name, i);
    }
    for required in REQUIRED_COLUMNS {
        if !positions.contains_key(required) {
            return Err(Error::MissingColumn {
                path: path.to_path_buf(),
                column: required.to_string(),
            });
        }
    }
    for name in headers.iter() {
        if !REQUIRED_COLUMNS.contains(&name) && name != "severity" {
            return Err(Error::UnknownColumn {
                path: path.to_path_buf(),
                column: name.to_string(),
            });
        }
    }
    let col = |name: &str| positions[name];
    let (c_id, c_cohort, c_ood, c_perf) = (
        col("sample_id"),
        col("cohort"),
        col("ood_score"),
        col("perf_score"),
    );
    let c_severity = positions.get("severity").copied();

    let mut records = Vec::new();
    for (line, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let field = |idx: usize| row.get(idx).unwrap_or("");
        let sample_id = field(c_id).to_string();
        let parse_f64 = |name: &str, value: &str| -> Result<f64> {
            value.parse::<f64>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                message: format!(
                    "row {}: cannot parse {name} value `{value}` for sample `{sample_id}`",
                    line + 2
                ),
            })
        };
        let ood_score = parse_f64("ood_score", field(c_ood))?;
        let perf_score = parse_f64("perf_score", field(c_perf))?;
        let severity = match c_severity {
            Some(c) => {
                let value = field(c);
                if value.is_empty() {
                    None
                } else {
                    Some(value.parse::<u32>().map_err(|_| Error::Parse {
                        path: path.to_path_buf(),
                        message: format!(
                            "row {}: cannot parse severity value `{value}` for sample `{sample_id}`",
                            line + 2
                        ),
                    })?)
                }
            }
            None => None,
        };
        records.push(SampleRecord {
            sample_id,
            cohort: field(c_cohort).to_string(),
            ood_score,
            perf_score,
            severity,
        });
    }
    Ok(records)
}

fn parse_json(path: &Path, raw: &[u8]) -> Result<Vec<SampleRecord>> {
    if raw.iter().all(|b| b.is_ascii_whitespace()) {
        return Err(Error::EmptyInput {
            path: path.to_path_buf(),
        });
    }
    serde_json::from_slice::<Vec<SampleRecord>>(raw).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Expected in-distribution performance used as the drop baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceScore {
    pub s0: f64,
    pub source: ReferenceSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceSource {
    ComputedFromIdTest,
    ExternallySupplied,
}

impl ReferenceScore {
    /// Wraps an externally supplied baseline, e.g. the score of a different
    /// segmentation model the current one is compared against.
    pub fn external(s0: f64) -> Result<Self> {
        if !s0.is_finite() {
            return Err(Error::InvalidRecord {
                sample_id: String::new(),
                reason: "reference score must be finite".to_string(),
            });
        }
        Ok(ReferenceScore {
            s0,
            source: ReferenceSource::ExternallySupplied,
        })
    }
}

/// Mean downstream performance over the id-test cohort, untrimmed.
pub fn compute_reference(table: &ScoreTable) -> Result<ReferenceScore> {
    let perf = table.id_perf_scores();
    if perf.is_empty() {
        return Err(Error::EmptyIdCohort);
    }
    let s0 = perf.iter().sum::<f64>() / perf.len() as f64;
    Ok(ReferenceScore {
        s0,
        source: ReferenceSource::ComputedFromIdTest,
    })
}
