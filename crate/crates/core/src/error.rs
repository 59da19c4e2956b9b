use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt file: {0}")]
    CorruptFile(String),
    #[error("missing frame {index} ({path})")]
    MissingFrame { index: usize, path: String },
    #[error("wrong media type: expected {expected}, got {actual}")]
    WrongMediaType { expected: String, actual: String },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("degenerate mesh: {0}")]
    DegenerateMesh(String),
    #[error("empty image")]
    EmptyImage,
    #[error("duplicate id: {0}")]
    DuplicateId(String),
    #[error("index for table `{0}` is stale or missing; rebuild it")]
    IndexStale(String),
    #[error("metric {0} is not supported by this index")]
    UnsupportedMetric(String),
    #[error("negative component at position {0} (chi-squared needs non-negative input)")]
    NegativeComponent(usize),
    #[error("unknown feature category: {0}")]
    UnknownCategory(String),
    #[error("unknown segment: {0}")]
    UnknownSegment(String),
    #[error("unknown id: {0}")]
    UnknownId(String),
    #[error("segment {segment} has no stored vectors for {category}")]
    MissingVectors { segment: String, category: String },
    #[error("feature extraction failed: {0}")]
    ExtractionFailed(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("unsupported query term: {0}")]
    UnsupportedTerm(String),
    #[error("session expired or unknown: {0}")]
    SessionExpired(String),
    #[error("invalid rating {0}; ratings are 0..=3")]
    InvalidRating(u8),
    #[error("malformed scenario script: {0}")]
    MalformedScript(String),
    #[error("engine unreachable: {0}")]
    EngineUnreachable(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}
