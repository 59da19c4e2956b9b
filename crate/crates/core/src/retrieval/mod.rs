//! Online retrieval: query composition, per-category kNN, score
//! normalisation, fusion, More-Like-This and session refinement.

mod engine;
mod fusion;
mod query;
mod spec;

pub use engine::{
    calibrate, segment_of, stored_probe, CategoryBatch, Probe, QueryOutcome, RefineRequest, Retriever, SegmentHit,
    CALIBRATION_PERCENTILE,
};
pub use fusion::{
    aggregate_objects, component_score, correspondence, fuse, rank, ObjectScore, RawScores, ScoreMap, ScoredResult,
    TermScores, WeightOverrides, WeightedCategory,
};
pub use query::{Query, QueryComponent, QueryTerm, Reference, TermType, DEFAULT_K};
pub use spec::{ComponentSpec, PathPolicy, QuerySpec, ReferenceKind, TermSpec};
