//! Scripted scenarios with planted ground truth, auto-rated and scored.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::{evaluate, Metrics, NdcgParams, DEFAULT_CUTOFF, MAX_RATING};
use crate::error::{Error, Result};
use crate::retrieval::{PathPolicy, QuerySpec, RefineRequest, Retriever};
use crate::store::Store;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub query: QuerySpec,
    /// Applied in order after the query; each counts as one more query.
    #[serde(default)]
    pub refine: Vec<RefineRequest>,
    /// Planted items, rated 3. Entries match a segment id, object id or object name.
    #[serde(default)]
    pub relevant: BTreeSet<String>,
    /// Same-class items, rated 2.
    #[serde(default)]
    pub similar: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioScript {
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
    #[serde(default)]
    pub ndcg: NdcgParams,
    #[serde(rename = "scenario", default)]
    pub scenarios: Vec<Scenario>,
}

fn default_cutoff() -> usize {
    DEFAULT_CUTOFF
}

impl ScenarioScript {
    /// Parses TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        let script: ScenarioScript = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::MalformedScript(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| Error::MalformedScript(e.to_string()))?
        };
        if script.cutoff == 0 {
            return Err(Error::MalformedScript("cutoff must be at least 1".into()));
        }
        let mut ids = BTreeSet::new();
        for s in &script.scenarios {
            if !ids.insert(&s.id) {
                return Err(Error::MalformedScript(format!("duplicate scenario id {}", s.id)));
            }
        }
        Ok(script)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// One returned segment, with what is needed to match ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedItem {
    pub segment_id: String,
    pub object_id: String,
    pub name: String,
}

/// Something that answers scenario queries: the local store or a server.
pub trait ScenarioEngine {
    /// Runs the query, then each refinement, and returns the final list.
    fn run(&mut self, query: &QuerySpec, refine: &[RefineRequest], base: &Path) -> Result<Vec<RankedItem>>;
}

/// Answers scenarios in-process.
pub struct LocalEngine<'a> {
    pub store: &'a Store,
    pub retriever: &'a Retriever,
}

impl ScenarioEngine for LocalEngine<'_> {
    fn run(&mut self, query: &QuerySpec, refine: &[RefineRequest], base: &Path) -> Result<Vec<RankedItem>> {
        let q = query.decode(PathPolicy::Allow(base))?;
        let mut out = self.retriever.execute(self.store, &q, |_| {})?;
        for r in refine {
            out = self.retriever.refine(self.store, &out.session_id, r)?;
        }
        let catalog = self.store.catalog();
        Ok(out
            .results
            .into_iter()
            .map(|r| RankedItem {
                name: catalog.object(&r.object_id).map(|o| o.name.clone()).unwrap_or_default(),
                segment_id: r.segment_id,
                object_id: r.object_id,
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelevanceJudgment {
    pub rank: usize,
    pub rating: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub id: String,
    pub judgments: Vec<RelevanceJudgment>,
    pub query_count: usize,
    pub success: bool,
    pub metrics: Metrics,
    /// Set when the scenario could not be run; metrics are then zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenarios: usize,
    pub mean_precision: f64,
    pub mean_reciprocal_rank: f64,
    pub mean_average_precision: f64,
    pub mean_ndcg: f64,
    pub success_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub cutoff: usize,
    pub scenarios: Vec<ScenarioResult>,
    pub summary: Summary,
}

/// 3 for planted items, 2 for same-class items, otherwise 0.
pub fn rate(item: &RankedItem, scenario: &Scenario) -> u8 {
    let matches = |set: &BTreeSet<String>| {
        set.contains(&item.segment_id) || set.contains(&item.object_id) || set.contains(&item.name)
    };
    if matches(&scenario.relevant) {
        MAX_RATING
    } else if matches(&scenario.similar) {
        2
    } else {
        0
    }
}

/// Runs every scenario in order. Only an unreachable engine aborts the run;
/// other failures are recorded on the scenario.
pub fn run_scenarios(script: &ScenarioScript, base: &Path, engine: &mut dyn ScenarioEngine) -> Result<EvalReport> {
    let k = script.cutoff;
    let mut results = Vec::with_capacity(script.scenarios.len());
    for s in &script.scenarios {
        let query_count = 1 + s.refine.len();
        let (ratings, error) = match engine.run(&s.query, &s.refine, base) {
            Ok(items) => (items.iter().take(k).map(|i| rate(i, s)).collect::<Vec<u8>>(), None),
            Err(e @ Error::EngineUnreachable(_)) => return Err(e),
            Err(e) => (Vec::new(), Some(e.to_string())),
        };
        let mut padded = ratings;
        padded.resize(k, 0);
        let metrics = evaluate(&padded, k, script.ndcg)?;
        results.push(ScenarioResult {
            id: s.id.clone(),
            judgments: padded.iter().enumerate().map(|(i, &rating)| RelevanceJudgment { rank: i + 1, rating }).collect(),
            query_count,
            success: metrics.success,
            metrics,
            error,
        });
    }
    let n = results.len();
    let mean = |f: fn(&ScenarioResult) -> f64| if n == 0 { 0.0 } else { results.iter().map(f).sum::<f64>() / n as f64 };
    let summary = Summary {
        scenarios: n,
        mean_precision: mean(|r| r.metrics.precision),
        mean_reciprocal_rank: mean(|r| r.metrics.reciprocal_rank),
        mean_average_precision: mean(|r| r.metrics.average_precision),
        mean_ndcg: mean(|r| r.metrics.ndcg),
        success_rate: mean(|r| f64::from(u8::from(r.success))),
    };
    Ok(EvalReport { cutoff: k, scenarios: results, summary })
}

impl EvalReport {
    /// Aligned text table, one row per scenario plus a mean row.
    pub fn table(&self) -> String {
        let k = self.cutoff;
        let width = self.scenarios.iter().map(|s| s.id.len()).max().unwrap_or(0).max(8);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:>7}  {:>7}  {:>7}  {:>7}  {:>7}  {:>7}",
            "scenario",
            "queries",
            format!("p@{k}"),
            "MRR",
            "AP",
            format!("NDCG@{k}"),
            "success"
        );
        for s in &self.scenarios {
            let m = &s.metrics;
            let _ = writeln!(
                out,
                "{:<width$}  {:>7}  {:>7.4}  {:>7.4}  {:>7.4}  {:>7.4}  {:>7}",
                s.id,
                s.query_count,
                m.precision,
                m.reciprocal_rank,
                m.average_precision,
                m.ndcg,
                if s.success { "yes" } else { "no" }
            );
        }
        let t = &self.summary;
        let _ = writeln!(
            out,
            "{:<width$}  {:>7}  {:>7.4}  {:>7.4}  {:>7.4}  {:>7.4}  {:>6.0}%",
            "mean",
            "",
            t.mean_precision,
            t.mean_reciprocal_rank,
            t.mean_average_precision,
            t.mean_ndcg,
            100.0 * t.success_rate
        );
        out
    }
}
