//! Late fusion of per-category similarities: weighted mean inside a term,
//! arithmetic mean across the terms of a component (AND), max across
//! components (OR).

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::media::MediaType;

/// Segment id → similarity in `[0, 1]`.
pub type ScoreMap = BTreeMap<String, f64>;

/// Maps a distance to a similarity: `max(0, 1 − d / d_max)`.
pub fn correspondence(distance: f64, d_max: f64) -> f64 {
    (1.0 - distance / d_max).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedCategory {
    pub category: String,
    pub weight: f64,
}

/// Raw per-category similarities of one executed term.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TermScores {
    pub categories: Vec<WeightedCategory>,
    pub scores: BTreeMap<String, ScoreMap>,
}

/// Everything needed to re-fuse a query without touching the store.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RawScores {
    pub components: Vec<Vec<TermScores>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredResult {
    pub segment_id: String,
    pub object_id: String,
    pub score: f64,
    pub per_category_scores: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectScore {
    pub object_id: String,
    pub score: f64,
}

/// Category weight overrides applied on top of each term's own weights.
pub type WeightOverrides = BTreeMap<String, f64>;

fn effective_weight(c: &WeightedCategory, overrides: &WeightOverrides) -> f64 {
    overrides.get(&c.category).copied().unwrap_or(c.weight)
}

impl TermScores {
    /// Σ wᵢ·sᵢ / Σ wᵢ with absent segments scoring 0; 0 when all weights are 0.
    pub fn score(&self, segment: &str, overrides: &WeightOverrides) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for c in &self.categories {
            let w = effective_weight(c, overrides);
            if w <= 0.0 {
                continue;
            }
            let s = self.scores.get(&c.category).and_then(|m| m.get(segment)).copied().unwrap_or(0.0);
            num += w * s;
            den += w;
        }
        if den > 0.0 {
            (num / den).min(1.0)
        } else {
            0.0
        }
    }

    fn segments<'a>(&'a self, out: &mut std::collections::BTreeSet<&'a str>) {
        for m in self.scores.values() {
            out.extend(m.keys().map(String::as_str));
        }
    }
}

/// AND: mean of the component's term scores.
pub fn component_score(terms: &[TermScores], segment: &str, overrides: &WeightOverrides) -> f64 {
    if terms.is_empty() {
        return 0.0;
    }
    terms.iter().map(|t| t.score(segment, overrides)).sum::<f64>() / terms.len() as f64
}

/// Fused score of every segment seen by any category, with the per-category
/// similarities of the best component (first on ties).
pub fn fuse(raw: &RawScores, overrides: &WeightOverrides) -> BTreeMap<String, (f64, BTreeMap<String, f64>)> {
    let mut segments = std::collections::BTreeSet::new();
    for terms in &raw.components {
        terms.iter().for_each(|t| t.segments(&mut segments));
    }
    let mut fused = BTreeMap::new();
    for seg in segments {
        let mut best: Option<(f64, usize)> = None;
        for (ci, terms) in raw.components.iter().enumerate() {
            let s = component_score(terms, seg, overrides);
            if best.is_none_or(|(b, _)| s > b) {
                best = Some((s, ci));
            }
        }
        let Some((score, ci)) = best else { continue };
        let mut per_category = BTreeMap::new();
        for t in &raw.components[ci] {
            for c in &t.categories {
                if effective_weight(c, overrides) > 0.0 {
                    let s = t.scores.get(&c.category).and_then(|m| m.get(seg)).copied().unwrap_or(0.0);
                    per_category.insert(c.category.clone(), s);
                }
            }
        }
        fused.insert(seg.to_string(), (score, per_category));
    }
    fused
}

/// Sorts fused scores (descending, ties by segment id), drops zero scores and
/// filtered media types, and keeps the top `k`.
pub fn rank(
    fused: BTreeMap<String, (f64, BTreeMap<String, f64>)>,
    k: usize,
    media_filter: Option<&[MediaType]>,
    resolve: impl Fn(&str) -> Option<(String, MediaType)>,
) -> Vec<ScoredResult> {
    let mut results: Vec<ScoredResult> = fused
        .into_iter()
        .filter(|(_, (score, _))| *score > 0.0)
        .filter_map(|(segment_id, (score, per_category_scores))| {
            let (object_id, media_type) = resolve(&segment_id)?;
            if media_filter.is_some_and(|f| !f.is_empty() && !f.contains(&media_type)) {
                return None;
            }
            Some(ScoredResult { segment_id, object_id, score, per_category_scores })
        })
        .collect();
    results.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.segment_id.cmp(&b.segment_id)));
    results.truncate(k);
    results
}

/// Object score = best segment score; descending, ties by object id.
pub fn aggregate_objects(results: &[ScoredResult]) -> Vec<ObjectScore> {
    let mut best: HashMap<&str, f64> = HashMap::new();
    for r in results {
        let e = best.entry(&r.object_id).or_insert(r.score);
        *e = e.max(r.score);
    }
    let mut out: Vec<ObjectScore> =
        best.into_iter().map(|(object_id, score)| ObjectScore { object_id: object_id.to_string(), score }).collect();
    out.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.object_id.cmp(&b.object_id)));
    out
}
