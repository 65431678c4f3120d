//! Error type shared by every module of the evaluation engine.

use std::io;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Broad category of an [`Error`], used by front ends to pick a status code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed input (bad CSV, bad parameter).
    Validation,
    /// A referenced entity does not exist.
    NotFound,
    /// The entity already exists.
    Conflict,
    /// Input is well-formed but the operation cannot be applied to it.
    Semantic,
    /// Storage or other environment failure.
    Internal,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("duplicate record id `{0}`")]
    DuplicateRecordId(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("row {row} has {found} fields, expected {expected}")]
    RowArity {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("unknown record id `{0}`")]
    UnknownRecordId(String),
    #[error("record `{0}` is paired with itself")]
    SelfPair(String),
    #[error("invalid value: {0}")]
    Value(String),
    #[error("{kind} `{id}` not found")]
    NotFound { kind: &'static str, id: String },
    #[error("{0}")]
    Conflict(String),
    #[error("inconsistent pair counts: {0}")]
    CountInconsistency(String),
    #[error("sample count must be at least 2, got {0}")]
    InvalidSampleCount(usize),
    #[error("clustering is empty")]
    EmptyClustering,
    #[error("clusterings cover different record counts ({left} vs {right})")]
    UniverseMismatch { left: usize, right: usize },
    #[error("majority vote needs at least three experiments, got {0}")]
    FewerThanThreeExperiments(usize),
    #[error("sources belong to different datasets")]
    MixedDatasets,
    #[error("set expression needs at least one included source")]
    EmptyInclude,
    #[error("venn diagrams support 2 to 4 sources, got {0}")]
    TooManySources(usize),
    #[error("experiment has no similarity scores")]
    NoSimilarities,
    #[error("operation requires a gold standard")]
    NoGold,
    #[error("no candidate pairs to compare against")]
    NoCandidates,
    #[error("experiment `{0}` has no effort recorded")]
    MissingEffort(String),
    #[error("aggregation term `{0}` is missing for at least one row")]
    MissingTerm(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DuplicateRecordId(_) => "DuplicateRecordId",
            Error::Schema(_) => "SchemaError",
            Error::RowArity { .. } => "RowArityError",
            Error::UnknownRecordId(_) => "UnknownRecordId",
            Error::SelfPair(_) => "SelfPairError",
            Error::Value(_) => "ValueError",
            Error::NotFound { .. } => "NotFound",
            Error::Conflict(_) => "Conflict",
            Error::CountInconsistency(_) => "CountInconsistency",
            Error::InvalidSampleCount(_) => "InvalidSampleCount",
            Error::EmptyClustering => "EmptyClustering",
            Error::UniverseMismatch { .. } => "UniverseMismatch",
            Error::FewerThanThreeExperiments(_) => "FewerThanThreeExperiments",
            Error::MixedDatasets => "MixedDatasets",
            Error::EmptyInclude => "EmptyInclude",
            Error::TooManySources(_) => "TooManySources",
            Error::NoSimilarities => "NoSimilarities",
            Error::NoGold => "NoGold",
            Error::NoCandidates => "NoCandidates",
            Error::MissingEffort(_) => "MissingEffort",
            Error::MissingTerm(_) => "MissingTerm",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Io(_) => "IoError",
            Error::Csv(_) => "CsvError",
            Error::Json(_) => "JsonError",
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::DuplicateRecordId(_)
            | Error::Schema(_)
            | Error::RowArity { .. }
            | Error::UnknownRecordId(_)
            | Error::SelfPair(_)
            | Error::Value(_)
            | Error::InvalidSampleCount(_)
            | Error::InvalidArgument(_)
            | Error::Csv(_)
            | Error::Json(_) => ErrorKind::Validation,
            Error::NotFound { .. } => ErrorKind::NotFound,
            Error::Conflict(_) => ErrorKind::Conflict,
            Error::CountInconsistency(_)
            | Error::EmptyClustering
            | Error::UniverseMismatch { .. }
            | Error::FewerThanThreeExperiments(_)
            | Error::MixedDatasets
            | Error::EmptyInclude
            | Error::TooManySources(_)
            | Error::NoSimilarities
            | Error::NoGold
            | Error::NoCandidates
            | Error::MissingEffort(_)
            | Error::MissingTerm(_) => ErrorKind::Semantic,
            Error::Io(_) => ErrorKind::Internal,
        }
    }

    pub(crate) fn not_found(kind: &'static str, id: impl Into<String>) -> Self {
        Error::NotFound {
            kind,
            id: id.into(),
        }
    }
}
