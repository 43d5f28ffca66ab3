use std::path::PathBuf;

use thiserror::Error;

use crate::distributions::FamilyId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: u64, reason: String },

    #[error("line {line}: negative precipitation {value} mm")]
    NegativePrecip { line: u64, value: f64 },

    #[error("station {station}: duplicate observation for {year}-{month:02}")]
    DuplicateMonth { station: String, year: i32, month: u8 },

    #[error("station {station}: missing observation for {year}-{month:02}")]
    MissingMonth { station: String, year: i32, month: u8 },

    #[error("input contains no observations")]
    EmptyInput,

    #[error("sample is empty")]
    EmptySample,

    #[error("sample of size {n} is too small (need at least {required})")]
    SampleTooSmall { n: usize, required: usize },

    #[error("sample is degenerate (zero spread)")]
    DegenerateSample,

    #[error("invalid parameters for {family}: {reason}")]
    InvalidParams { family: FamilyId, reason: String },

    #[error("{family}: observation outside the support with location fixed at 0")]
    OutsideSupport { family: FamilyId },

    #[error("probability {0} is outside (0, 1)")]
    InvalidProbability(f64),

    #[error("convergence failure: {0}")]
    ConvergenceFailure(String),

    #[error("chi-square test has {dof} degrees of freedom after merging {bins} bins")]
    TooFewBins { bins: usize, dof: i64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("station {station}, family {family}: {source}")]
    InFit {
        station: String,
        family: FamilyId,
        #[source]
        source: Box<Error>,
    },

    #[error("station {station}: {source}")]
    InStation {
        station: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag for the error summary emitted by the CLI.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MalformedRow { .. } => "malformed_row",
            Error::NegativePrecip { .. } => "negative_precip",
            Error::DuplicateMonth { .. } => "duplicate_month",
            Error::MissingMonth { .. } => "missing_month",
            Error::EmptyInput => "empty_input",
            Error::EmptySample => "empty_sample",
            Error::SampleTooSmall { .. } => "sample_too_small",
            Error::DegenerateSample => "degenerate_sample",
            Error::InvalidParams { .. } => "invalid_params",
            Error::OutsideSupport { .. } => "outside_support",
            Error::InvalidProbability(_) => "invalid_probability",
            Error::ConvergenceFailure(_) => "convergence_failure",
            Error::TooFewBins { .. } => "too_few_bins",
            Error::InvalidConfig(_) => "invalid_config",
            Error::InFit { source, .. } | Error::InStation { source, .. } => source.kind(),
            Error::Io { .. } => "io_failure",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}
