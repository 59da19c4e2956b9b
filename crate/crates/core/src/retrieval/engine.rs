use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant, SystemTime};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::fusion::{fuse, rank, RawScores, ScoreMap, ScoredResult, TermScores, WeightOverrides, WeightedCategory};
use super::query::{Query, QueryTerm, Reference};
use super::correspondence;
use crate::config::{EngineConfig, RetrievalConfig};
use crate::error::{Error, Result};
use crate::features::audio::{extract_audio_features, AudioParams, FingerprintHash};
use crate::features::image::{average_color_grid, bow_histogram, detect_local_descriptors, edge_histogram, hog_descriptor};
use crate::features::shape::{
    lightfield_descriptor, lightfield_distance, normalize_mesh, sh_descriptor, sketch_to_lightfield_query,
    LightFieldDescriptor, VIEWS,
};
use crate::features::{self, COLOR_GRID, EDGE_HISTOGRAM, FINGERPRINT, HOG, LIGHTFIELD, SPHERICAL_HARMONICS, SURF_BOW};
use crate::media::MediaType;
use crate::store::{Calibration, Store, VectorTable};

pub const CALIBRATION_PERCENTILE: f64 = 0.95;

/// Segment id of a stored row: multi-row categories use `<segment>#<n>`.
pub fn segment_of(row_id: &str) -> &str {
    row_id.split_once('#').map_or(row_id, |(s, _)| s)
}

/// 95th percentile of distances between `pairs` random pairs of distinct rows.
/// Falls back to the largest sampled distance, then to 1, when that is zero.
pub fn calibrate(table: &VectorTable, pairs: usize, seed: u64) -> Calibration {
    let n = table.len();
    if n < 2 || pairs == 0 {
        return Calibration { d_max: 1.0, pairs: 0, seed };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let metric = table.metric();
    let mut dists: Vec<f64> = (0..pairs)
        .map(|_| {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            metric.eval(table.row(i), table.row(j))
        })
        .collect();
    dists.sort_by(f64::total_cmp);
    let rank = ((CALIBRATION_PERCENTILE * pairs as f64).ceil() as usize).clamp(1, pairs);
    let mut d_max = dists[rank - 1];
    if !(d_max > 0.0) {
        d_max = *dists.last().expect("pairs > 0");
    }
    if !(d_max > 0.0 && d_max.is_finite()) {
        d_max = 1.0;
    }
    Calibration { d_max, pairs, seed }
}

/// What a category is searched with.
#[derive(Debug, Clone)]
pub enum Probe {
    Rows(Vec<Vec<f64>>),
    Hashes(Vec<FingerprintHash>),
    Model(LightFieldDescriptor),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentHit {
    pub segment_id: String,
    pub score: f64,
}

/// Similarities of one category of one term, reported as soon as it completes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryBatch {
    pub component: usize,
    pub term: usize,
    pub category: String,
    pub hits: Vec<SegmentHit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryOutcome {
    pub session_id: String,
    pub results: Vec<ScoredResult>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RefineRequest {
    /// Category weight overrides, merged into the session's current ones.
    #[serde(default)]
    pub weights: BTreeMap<String, f64>,
    /// Replaces the media filter when present; an empty list clears it.
    #[serde(default)]
    pub media_filter: Option<Vec<MediaType>>,
}

struct Session {
    raw: RawScores,
    k: usize,
    media_filter: Option<Vec<MediaType>>,
    weights: WeightOverrides,
    touched: Instant,
}

/// Runs queries against a store and keeps per-session score caches.
pub struct Retriever {
    config: RetrievalConfig,
    audio: AudioParams,
    ttl: Duration,
    sessions: Mutex<HashMap<String, Session>>,
    counter: AtomicU64,
}

fn extraction(e: Error) -> Error {
    match e {
        Error::ExtractionFailed(_) => e,
        other => Error::ExtractionFailed(other.to_string()),
    }
}

impl Retriever {
    pub fn new(config: &EngineConfig) -> Self {
        Retriever {
            config: config.retrieval.clone(),
            audio: config.audio_params(),
            ttl: Duration::from_secs(config.retrieval.session_ttl_secs),
            sessions: Mutex::new(HashMap::new()),
            counter: AtomicU64::new(0),
        }
    }

    pub fn config(&self) -> &RetrievalConfig {
        &self.config
    }

    /// Descriptors of a term's reference for each of its categories.
    pub fn probes(&self, store: &Store, term: &QueryTerm, categories: &[WeightedCategory]) -> Result<Vec<Probe>> {
        let wanted = |name: &str| categories.iter().any(|c| c.category == name);
        let audio = match &term.reference {
            Reference::Audio(buf) if !buf.is_empty() => Some(extract_audio_features(buf, &self.audio)),
            Reference::Audio(_) => return Err(Error::ExtractionFailed("empty audio reference".into())),
            _ => None,
        };
        let normalized = match &term.reference {
            Reference::Mesh(mesh) => Some(normalize_mesh(mesh).map_err(extraction)?),
            _ => None,
        };
        let lightfield = match &normalized {
            Some(nm) if wanted(LIGHTFIELD) => Some(lightfield_descriptor(nm).map_err(extraction)?),
            _ => None,
        };
        categories
            .iter()
            .map(|c| {
                let name = c.category.as_str();
                Ok(match &term.reference {
                    Reference::Image(img) => Probe::Rows(match name {
                        COLOR_GRID => vec![average_color_grid(img)],
                        EDGE_HISTOGRAM => vec![edge_histogram(img)],
                        HOG => vec![hog_descriptor(img)],
                        SURF_BOW => match store.codebook(SURF_BOW) {
                            Some(cb) => vec![bow_histogram(&detect_local_descriptors(img), cb)?],
                            None => Vec::new(),
                        },
                        _ => return Err(Error::UnknownCategory(name.to_string())),
                    }),
                    Reference::Audio(_) => {
                        let feats = audio.as_ref().expect("audio features computed above");
                        if name == FINGERPRINT {
                            Probe::Hashes(feats.fingerprints.clone())
                        } else {
                            let rows = feats.vectors(name).ok_or_else(|| Error::UnknownCategory(name.to_string()))?;
                            Probe::Rows(rows.to_vec())
                        }
                    }
                    Reference::Mesh(_) => match name {
                        SPHERICAL_HARMONICS => {
                            let nm = normalized.as_ref().expect("mesh normalized above");
                            Probe::Rows(vec![sh_descriptor(nm).map_err(extraction)?])
                        }
                        _ => Probe::Model(lightfield.clone().expect("descriptor computed above")),
                    },
                    Reference::Silhouette(img) => {
                        Probe::Rows(vec![sketch_to_lightfield_query(img).map_err(extraction)?])
                    }
                    Reference::Motion => return Err(Error::UnsupportedTerm("MOTION".into())),
                })
            })
            .collect()
    }

    fn d_max(&self, store: &Store, category: &str, table: &VectorTable) -> f64 {
        store.calibration(category).map_or_else(|| calibrate(table, 1000, 42).d_max, |c| c.d_max)
    }

    /// Similarities of the best `fetch` segments for one category.
    pub fn category_scores(
        &self,
        store: &Store,
        category: &str,
        probe: &Probe,
        fetch: usize,
        exclude: Option<&str>,
    ) -> Result<ScoreMap> {
        let mut map = ScoreMap::new();
        let keep = |map: &mut ScoreMap, seg: &str, s: f64| {
            if Some(seg) != exclude {
                let e = map.entry(seg.to_string()).or_insert(s);
                *e = e.max(s);
            }
        };
        match probe {
            Probe::Hashes(hashes) => {
                if !hashes.is_empty() {
                    for m in store.fingerprints().lookup(hashes) {
                        keep(&mut map, &m.segment_id, (m.votes as f64 / hashes.len() as f64).min(1.0));
                    }
                }
            }
            Probe::Rows(rows) => {
                let Some(table) = store.table(category) else { return Ok(map) };
                let d_max = self.d_max(store, category, table);
                let multi = features::category(category).is_some_and(|c| c.multi_row);
                let per_segment = if multi && !table.is_empty() {
                    let segments: HashSet<&str> = table.ids().iter().map(|id| segment_of(id)).collect();
                    table.len().div_ceil(segments.len())
                } else {
                    1
                };
                let depth = (fetch + 1) * per_segment;
                for q in rows {
                    if q.len() != table.dim() {
                        return Err(Error::DimensionMismatch { expected: table.dim(), actual: q.len() });
                    }
                    for hit in store.knn(category, q, depth, self.config.strategy)?.hits {
                        keep(&mut map, segment_of(&hit.row_id), correspondence(hit.distance, d_max));
                    }
                }
            }
            Probe::Model(descriptor) => {
                let Some(table) = store.table(category) else { return Ok(map) };
                // Model distances add up one view distance per camera.
                let d_max = VIEWS as f64 * self.d_max(store, category, table);
                for (seg, model) in stored_models(table) {
                    keep(&mut map, seg, correspondence(lightfield_distance(descriptor, &model), d_max));
                }
            }
        }
        Ok(top_segments(map, fetch))
    }

    fn term_scores(
        &self,
        store: &Store,
        categories: Vec<WeightedCategory>,
        probes: &[Probe],
        k: usize,
        exclude: Option<&str>,
        mut report: impl FnMut(&str, &ScoreMap),
    ) -> Result<TermScores> {
        let fetch = k * self.config.fetch_factor;
        let mut scores = BTreeMap::new();
        for (c, probe) in categories.iter().zip(probes) {
            let map = self.category_scores(store, &c.category, probe, fetch, exclude)?;
            report(&c.category, &map);
            scores.insert(c.category.clone(), map);
        }
        Ok(TermScores { categories, scores })
    }

    /// Runs one term; the callback sees each category as it completes.
    pub fn execute_term(
        &self,
        store: &Store,
        term: &QueryTerm,
        k: usize,
        report: impl FnMut(&str, &ScoreMap),
    ) -> Result<TermScores> {
        let categories = term.resolved_categories()?;
        let probes = self.probes(store, term, &categories)?;
        self.term_scores(store, categories, &probes, k, None, report)
    }

    pub fn execute(
        &self,
        store: &Store,
        query: &Query,
        mut on_batch: impl FnMut(CategoryBatch),
    ) -> Result<QueryOutcome> {
        query.validate()?;
        // Validate every term before any extraction work starts.
        for comp in &query.components {
            for term in &comp.terms {
                term.resolved_categories()?;
            }
        }
        let mut raw = RawScores::default();
        for (ci, comp) in query.components.iter().enumerate() {
            let mut terms = Vec::new();
            for (ti, term) in comp.terms.iter().enumerate() {
                terms.push(self.execute_term(store, term, query.k, |category, map| {
                    on_batch(CategoryBatch { component: ci, term: ti, category: category.to_string(), hits: batch_hits(map) })
                })?);
            }
            raw.components.push(terms);
        }
        Ok(self.open_session(store, raw, query.k, query.media_filter.clone()))
    }

    /// Uses a stored segment's vectors as the query; the seed is excluded.
    pub fn more_like_this(&self, store: &Store, segment_id: &str, categories: &[String], k: usize) -> Result<QueryOutcome> {
        if store.catalog().segment(segment_id).is_none() {
            return Err(Error::UnknownSegment(segment_id.to_string()));
        }
        if k == 0 {
            return Err(Error::InvalidQuery("k must be at least 1".into()));
        }
        let names: Vec<String> = if categories.is_empty() {
            features::CATEGORIES
                .iter()
                .filter(|c| c.queryable && stored_probe(store, c.name, segment_id).is_some())
                .map(|c| c.name.to_string())
                .collect()
        } else {
            categories.to_vec()
        };
        let mut weighted = Vec::new();
        let mut probes = Vec::new();
        for name in &names {
            if !features::category(name).is_some_and(|c| c.queryable) {
                return Err(Error::UnknownCategory(name.clone()));
            }
            let probe = stored_probe(store, name, segment_id).ok_or_else(|| Error::MissingVectors {
                segment: segment_id.to_string(),
                category: name.clone(),
            })?;
            weighted.push(WeightedCategory { category: name.clone(), weight: 1.0 });
            probes.push(probe);
        }
        if weighted.is_empty() {
            return Err(Error::MissingVectors { segment: segment_id.to_string(), category: "any".into() });
        }
        let term = self.term_scores(store, weighted, &probes, k, Some(segment_id), |_, _| {})?;
        let raw = RawScores { components: vec![vec![term]] };
        Ok(self.open_session(store, raw, k, None))
    }

    /// Re-fuses a session's cached scores under new weights or filters.
    pub fn refine(&self, store: &Store, session_id: &str, request: &RefineRequest) -> Result<QueryOutcome> {
        for (c, w) in &request.weights {
            if !(w.is_finite() && (0.0..=1.0).contains(w)) {
                return Err(Error::InvalidQuery(format!("weight {w} of {c} outside [0, 1]")));
            }
        }
        let mut sessions = self.sessions.lock().expect("session lock poisoned");
        self.evict(&mut sessions);
        let session = sessions.get_mut(session_id).ok_or_else(|| Error::SessionExpired(session_id.to_string()))?;
        session.touched = Instant::now();
        session.weights.extend(request.weights.iter().map(|(c, w)| (c.clone(), *w)));
        if let Some(filter) = &request.media_filter {
            session.media_filter = (!filter.is_empty()).then(|| filter.clone());
        }
        let results = self.rank_session(store, session);
        Ok(QueryOutcome { session_id: session_id.to_string(), results })
    }

    /// Cached raw scores of a live session.
    pub fn session_scores(&self, session_id: &str) -> Option<RawScores> {
        let sessions = self.sessions.lock().expect("session lock poisoned");
        sessions.get(session_id).filter(|s| s.touched.elapsed() < self.ttl).map(|s| s.raw.clone())
    }

    fn rank_session(&self, store: &Store, s: &Session) -> Vec<ScoredResult> {
        let catalog = store.catalog();
        rank(fuse(&s.raw, &s.weights), s.k, s.media_filter.as_deref(), |seg| {
            let record = catalog.segment(seg)?;
            let object = catalog.object(&record.object_id)?;
            Some((object.object_id.clone(), object.media_type))
        })
    }

    fn open_session(&self, store: &Store, raw: RawScores, k: usize, media_filter: Option<Vec<MediaType>>) -> QueryOutcome {
        let session = Session { raw, k, media_filter, weights: WeightOverrides::new(), touched: Instant::now() };
        let results = self.rank_session(store, &session);
        let session_id = self.new_session_id();
        let mut sessions = self.sessions.lock().expect("session lock poisoned");
        self.evict(&mut sessions);
        sessions.insert(session_id.clone(), session);
        QueryOutcome { session_id, results }
    }

    fn evict(&self, sessions: &mut HashMap<String, Session>) {
        sessions.retain(|_, s| s.touched.elapsed() < self.ttl);
    }

    fn new_session_id(&self) -> String {
        let n = self.counter.fetch_add(1, Ordering::Relaxed);
        let nanos = SystemTime::now().duration_since(SystemTime::UNIX_EPOCH).map_or(0, |d| d.as_nanos());
        let digest = Sha256::digest(format!("{n}:{nanos}:{}", std::process::id()));
        digest[..12].iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn batch_hits(map: &ScoreMap) -> Vec<SegmentHit> {
    let mut hits: Vec<SegmentHit> =
        map.iter().map(|(s, &score)| SegmentHit { segment_id: s.clone(), score }).collect();
    hits.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.segment_id.cmp(&b.segment_id)));
    hits
}

fn top_segments(map: ScoreMap, n: usize) -> ScoreMap {
    if map.len() <= n {
        return map;
    }
    batch_hits(&map).into_iter().take(n).map(|h| (h.segment_id, h.score)).collect()
}

/// Light-field descriptors of every segment with all views stored.
fn stored_models(table: &VectorTable) -> Vec<(&str, LightFieldDescriptor)> {
    table
        .ids()
        .iter()
        .filter_map(|id| id.strip_suffix("#0"))
        .filter_map(|seg| model_of(table, seg).map(|m| (seg, m)))
        .collect()
}

fn model_of(table: &VectorTable, segment: &str) -> Option<LightFieldDescriptor> {
    let views = (0..VIEWS)
        .map(|v| table.get(&format!("{segment}#{v}")).map(|r| r.iter().map(|&x| x as f64).collect()))
        .collect::<Option<Vec<Vec<f64>>>>()?;
    Some(LightFieldDescriptor { views })
}

/// The stored vectors of `segment` for `category`, if any.
pub fn stored_probe(store: &Store, category: &str, segment: &str) -> Option<Probe> {
    if category == FINGERPRINT {
        let hashes = store.fingerprints().hashes_of(segment);
        return (!hashes.is_empty()).then_some(Probe::Hashes(hashes));
    }
    let table = store.table(category)?;
    if category == LIGHTFIELD {
        return model_of(table, segment).map(Probe::Model);
    }
    let to_f64 = |r: &[f32]| r.iter().map(|&x| x as f64).collect::<Vec<f64>>();
    let rows: Vec<Vec<f64>> = if features::category(category).is_some_and(|c| c.multi_row) {
        let prefix = format!("{segment}#");
        table.rows().filter(|(id, _)| id.starts_with(&prefix)).map(|(_, r)| to_f64(r)).collect()
    } else {
        table.get(segment).map(to_f64).into_iter().collect()
    };
    (!rows.is_empty()).then_some(Probe::Rows(rows))
}

impl Default for Retriever {
    fn default() -> Self {
        Retriever::new(&EngineConfig::default())
    }
}
