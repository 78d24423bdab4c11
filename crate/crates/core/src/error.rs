use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by ingestion, metric computation and the synthetic benchmark.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("schema error in `{path}`: missing column `{column}`")]
    MissingColumn { path: PathBuf, column: String },

    #[error("schema error in `{path}`: unknown column `{column}`")]
    UnknownColumn { path: PathBuf, column: String },

    #[error("parse error in `{path}`: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("empty input: `{path}` contains no records")]
    EmptyInput { path: PathBuf },

    #[error("invalid record `{sample_id}`: {reason}")]
    InvalidRecord { sample_id: String, reason: String },

    #[error("duplicate sample_id `{sample_id}`")]
    DuplicateSampleId { sample_id: String },

    #[error("id-test cohort is empty")]
    EmptyIdCohort,

    #[error("{what} is empty")]
    EmptyScores { what: &'static str },

    #[error("invalid threshold policy: {0}")]
    InvalidPolicy(String),

    #[error("flags misaligned: {flags} flags for {samples} samples")]
    MisalignedFlags { flags: usize, samples: usize },

    #[error("paired inputs differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {min} samples for {what}, got {got}")]
    TooFewSamples {
        what: &'static str,
        min: usize,
        got: usize,
    },

    #[error("invalid bootstrap parameters: {0}")]
    InvalidBootstrap(String),

    #[error("mask shapes differ: {a_h}x{a_w} vs {b_h}x{b_w}")]
    ShapeMismatch {
        a_h: usize,
        a_w: usize,
        b_h: usize,
        b_w: usize,
    },

    #[error("severity {0} is out of range (0..=5)")]
    InvalidSeverity(u8),

    #[error("invalid world config: {0}")]
    InvalidWorld(String),

    #[error("model fitting failed: {0}")]
    ModelFit(String),

    #[error("cohort sets differ between runs; symmetric difference: {missing:?}")]
    CohortMismatch { missing: Vec<String> },

    #[error("records missing severity: {sample_ids:?}")]
    MissingSeverity { sample_ids: Vec<String> },

    #[error("invalid report: {0}")]
    InvalidReport(String),

    #[error("unknown {what} `{value}`")]
    UnknownName { what: &'static str, value: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
