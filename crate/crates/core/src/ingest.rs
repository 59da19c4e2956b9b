//! Offline workflow: decode, segment, extract, store; then train the visual
//! codebook, back-fill bag-of-words vectors and calibrate every category.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::EngineConfig;
use crate::error::{Error, Result};
use crate::features::audio::extract_audio_features;
use crate::features::image::{
    average_color_grid, bow_histogram, detect_local_descriptors, edge_histogram, hog_descriptor, train_codebook,
};
use crate::features::shape::{lightfield_descriptor, normalize_mesh, sh_descriptor};
use crate::features::{
    self, CENS_SHINGLE, COLOR_GRID, EDGE_HISTOGRAM, HOG, HPCP_SHINGLE, LIGHTFIELD, MFCC_SHINGLE, SPHERICAL_HARMONICS,
    SURF_BOW, SURF_LOCAL,
};
use crate::media::{
    load_audio, load_image, load_mesh, load_video_manifest, AudioBuffer, MediaObject, MediaType, RasterImage,
    TriangleMesh, VideoDocument,
};
use crate::retrieval::{calibrate, segment_of};
use crate::segment::{segment_audio_windows, segment_video_shots, trivial_segment, SegmentRecord};
use crate::store::{CodebookInfo, Store};

#[derive(Debug, Clone)]
pub enum Document {
    Image(RasterImage),
    Audio(AudioBuffer),
    Video(VideoDocument),
    Mesh(TriangleMesh),
}

impl Document {
    pub fn media_type(&self) -> MediaType {
        match self {
            Document::Image(_) => MediaType::Image,
            Document::Audio(_) => MediaType::Audio,
            Document::Video(_) => MediaType::Video,
            Document::Mesh(_) => MediaType::Model3d,
        }
    }

    pub fn load(path: &Path, media_type: MediaType) -> Result<Self> {
        Ok(match media_type {
            MediaType::Image => Document::Image(load_image(path)?),
            MediaType::Audio => Document::Audio(load_audio(path)?),
            MediaType::Video => Document::Video(load_video_manifest(path)?),
            MediaType::Model3d => Document::Mesh(load_mesh(path)?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectStatus {
    Ingested,
    /// Same bytes were ingested before; nothing was added.
    Existing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectReport {
    pub object_id: String,
    pub name: String,
    pub media_type: MediaType,
    pub status: ObjectStatus,
    pub segments: usize,
    pub vectors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestFailure {
    pub path: PathBuf,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub objects: Vec<ObjectReport>,
    pub failures: Vec<IngestFailure>,
    pub codebook: Option<CodebookInfo>,
    pub bow_vectors: usize,
}

/// Files named by `paths`; directories contribute their direct children with
/// a known media extension, sorted by name.
pub fn expand_paths(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut children: Vec<PathBuf> = std::fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|c| c.is_file() && MediaType::from_path(c).is_some())
                .collect();
            children.sort();
            out.extend(children);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

/// Ingests every path, continuing past failures, then finalizes and flushes.
pub fn ingest_paths(store: &mut Store, config: &EngineConfig, paths: &[PathBuf]) -> Result<IngestReport> {
    let mut report = IngestReport::default();
    for path in expand_paths(paths)? {
        match ingest_file(store, config, &path) {
            Ok(r) => report.objects.push(r),
            Err(e) => report.failures.push(IngestFailure { path, error: e.to_string() }),
        }
    }
    let (codebook, bow) = finalize(store, config)?;
    report.codebook = codebook;
    report.bow_vectors = bow;
    Ok(report)
}

pub fn ingest_file(store: &mut Store, config: &EngineConfig, path: &Path) -> Result<ObjectReport> {
    let media_type = MediaType::from_path(path)
        .ok_or_else(|| Error::UnsupportedFormat(format!("unknown file extension: {}", path.display())))?;
    let object = MediaObject::from_file(path, media_type)?;
    if store.catalog().object(&object.object_id).is_some() {
        return Ok(existing(store, &object));
    }
    let doc = Document::load(path, media_type)?;
    ingest_document(store, config, object, &doc)
}

fn existing(store: &Store, object: &MediaObject) -> ObjectReport {
    ObjectReport {
        object_id: object.object_id.clone(),
        name: object.name.clone(),
        media_type: object.media_type,
        status: ObjectStatus::Existing,
        segments: store.catalog().segments_of(&object.object_id).len(),
        vectors: 0,
    }
}

/// Vectors extracted for one segment, before they are written.
#[derive(Debug, Default)]
struct Extracted {
    rows: Vec<(&'static str, String, Vec<f64>)>,
    hashes: Vec<crate::features::audio::FingerprintHash>,
}

impl Extracted {
    fn single(&mut self, category: &'static str, segment: &str, v: Vec<f64>) {
        self.rows.push((category, segment.to_string(), v));
    }

    fn multi(&mut self, category: &'static str, segment: &str, rows: Vec<Vec<f64>>) {
        for (i, v) in rows.into_iter().enumerate() {
            self.rows.push((category, format!("{segment}#{i}"), v));
        }
    }

    fn image(&mut self, segment: &str, img: &RasterImage) {
        self.single(COLOR_GRID, segment, average_color_grid(img));
        self.single(EDGE_HISTOGRAM, segment, edge_histogram(img));
        self.single(HOG, segment, hog_descriptor(img));
        self.multi(SURF_LOCAL, segment, detect_local_descriptors(img));
    }

    fn audio(&mut self, segment: &str, audio: &AudioBuffer, config: &EngineConfig) {
        if audio.is_empty() {
            return;
        }
        let f = extract_audio_features(audio, &config.audio_params());
        self.multi(HPCP_SHINGLE, segment, f.hpcp_shingles);
        self.multi(CENS_SHINGLE, segment, f.cens_shingles);
        self.multi(MFCC_SHINGLE, segment, f.mfcc_shingles);
        self.hashes = f.fingerprints;
    }
}

/// Segments and extracts a decoded document and writes it to the store.
pub fn ingest_document(
    store: &mut Store,
    config: &EngineConfig,
    object: MediaObject,
    doc: &Document,
) -> Result<ObjectReport> {
    if doc.media_type() != object.media_type {
        return Err(Error::WrongMediaType {
            expected: object.media_type.to_string(),
            actual: doc.media_type().to_string(),
        });
    }
    if store.catalog().object(&object.object_id).is_some() {
        return Ok(existing(store, &object));
    }
    let id = object.object_id.clone();
    let (segments, extracted): (Vec<SegmentRecord>, Vec<Extracted>) = match doc {
        Document::Image(img) => {
            let seg = trivial_segment(&object)?;
            let mut x = Extracted::default();
            x.image(&seg.segment_id, img);
            (vec![seg], vec![x])
        }
        Document::Mesh(mesh) => {
            let seg = trivial_segment(&object)?;
            let nm = normalize_mesh(mesh)?;
            let mut x = Extracted::default();
            x.single(SPHERICAL_HARMONICS, &seg.segment_id, sh_descriptor(&nm)?);
            x.multi(LIGHTFIELD, &seg.segment_id, lightfield_descriptor(&nm)?.views);
            (vec![seg], vec![x])
        }
        Document::Audio(audio) => {
            if audio.is_empty() {
                return Err(Error::ExtractionFailed("audio has no samples".into()));
            }
            let segs = segment_audio_windows(&id, audio);
            let xs = segs
                .iter()
                .map(|s| {
                    let mut x = Extracted::default();
                    x.audio(&s.segment_id, &audio.slice(s.start as usize, s.end as usize), config);
                    x
                })
                .collect();
            (segs, xs)
        }
        Document::Video(video) => {
            let segs = segment_video_shots(&id, video)?;
            let mut xs = Vec::with_capacity(segs.len());
            for s in &segs {
                let mut x = Extracted::default();
                let keyframe = video.frame(((s.start + s.end) / 2) as usize)?;
                x.image(&s.segment_id, &keyframe);
                if let Some(track) = &video.audio {
                    let to_sample = |frame: u64| (frame as f64 / video.fps * track.sample_rate as f64).round() as usize;
                    x.audio(&s.segment_id, &track.slice(to_sample(s.start), to_sample(s.end)), config);
                }
                xs.push(x);
            }
            (segs, xs)
        }
    };

    let name = object.name.clone();
    let media_type = object.media_type;
    let n_segments = segments.len();
    store.catalog_mut().insert_object(object)?;
    let mut vectors = 0;
    for (seg, x) in segments.into_iter().zip(extracted) {
        let segment_id = seg.segment_id.clone();
        store.catalog_mut().insert_segment(seg)?;
        for (category, row_id, values) in x.rows {
            let metric = features::category(category).expect("registered category").metric;
            store.insert_vector(category, metric, &row_id, &values)?;
            vectors += 1;
        }
        if !x.hashes.is_empty() {
            store.insert_fingerprints(&segment_id, &x.hashes)?;
        }
    }
    Ok(ObjectReport { object_id: id, name, media_type, status: ObjectStatus::Ingested, segments: n_segments, vectors })
}

/// Trains the codebook if none exists, adds missing bag-of-words vectors,
/// recalibrates every category and flushes. Returns the new codebook (if
/// trained) and the number of bag-of-words rows added.
pub fn finalize(store: &mut Store, config: &EngineConfig) -> Result<(Option<CodebookInfo>, usize)> {
    let mut trained = None;
    let mut local: HashMap<String, Vec<Vec<f64>>> = HashMap::new();
    if let Some(table) = store.table(SURF_LOCAL) {
        for (id, row) in table.rows() {
            local.entry(segment_of(id).to_string()).or_default().push(row.iter().map(|&x| x as f64).collect());
        }
    }
    if store.codebook(SURF_BOW).is_none() {
        let mut all: Vec<Vec<f64>> = Vec::new();
        let mut segs: Vec<&String> = local.keys().collect();
        segs.sort();
        for s in segs {
            all.extend(local[s].iter().cloned());
        }
        if all.len() >= 2 {
            let k = config.ingest.codebook_k.min(all.len());
            let cb = train_codebook(SURF_BOW, &all, k, config.ingest.codebook_seed)?;
            store.set_codebook(cb, config.ingest.codebook_seed)?;
            trained = store.manifest().codebooks.get(SURF_BOW).copied();
        }
    }
    let mut added = 0;
    if let Some(cb) = store.codebook(SURF_BOW).cloned() {
        // Every segment with image descriptors gets a histogram, even an empty one.
        let mut pending: Vec<String> = store
            .table(HOG)
            .map(|t| t.ids().iter().filter(|id| store.table(SURF_BOW).is_none_or(|b| b.get(id).is_none())).cloned().collect())
            .unwrap_or_default();
        pending.sort();
        let metric = features::category(SURF_BOW).expect("registered").metric;
        for seg in pending {
            let descs = local.get(&seg).map(Vec::as_slice).unwrap_or(&[]);
            let hist = bow_histogram(descs, &cb)?;
            store.insert_vector(SURF_BOW, metric, &seg, &hist)?;
            added += 1;
        }
    }
    let names: Vec<String> = store.categories().map(str::to_string).collect();
    for name in names {
        let table = store.table(&name).expect("listed table");
        let c = calibrate(table, config.ingest.calibration_pairs, config.ingest.calibration_seed);
        store.set_calibration(&name, c);
    }
    store.flush()?;
    Ok((trained, added))
}
