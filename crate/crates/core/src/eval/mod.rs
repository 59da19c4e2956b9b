//! Evaluation: relevance metrics and scripted scenarios against an engine.

mod metrics;
mod scenario;

pub use metrics::{
    average_precision, check_ratings, evaluate, ndcg_at_k, precision_at_k, reciprocal_rank, to_binary, Gain, Metrics,
    NdcgParams, DEFAULT_CUTOFF, HIT_RATING, MAX_RATING,
};
pub use scenario::{
    rate, run_scenarios, EvalReport, LocalEngine, RankedItem, RelevanceJudgment, Scenario, ScenarioEngine,
    ScenarioResult, ScenarioScript, Summary,
};
