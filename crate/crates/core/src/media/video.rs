//! Videos are described by a small text manifest instead of a container file:
//!
//! ```text
//! fps=25
//! frames=frames/       # directory of <index>.png / <index>.ppm files, index from 0
//! count=120            # optional; every index below it must exist
//! audio=track.wav      # or `none`
//! ```
//!
//! Relative paths resolve against the manifest's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::{corrupt, load_audio, load_image, AudioBuffer, RasterImage};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub enum FrameSource {
    Path(PathBuf),
    Memory(Arc<RasterImage>),
}

#[derive(Debug, Clone)]
pub struct VideoDocument {
    frames: Vec<FrameSource>,
    pub fps: f64,
    pub audio: Option<AudioBuffer>,
}

impl VideoDocument {
    pub fn new(frames: Vec<FrameSource>, fps: f64, audio: Option<AudioBuffer>) -> Result<Self> {
        if frames.is_empty() {
            return Err(corrupt("video has no frames"));
        }
        if !(fps.is_finite() && fps > 0.0) {
            return Err(corrupt(format!("invalid fps {fps}")));
        }
        Ok(VideoDocument { frames, fps, audio })
    }

    /// In-memory video, mostly for tests and synthetic corpora.
    pub fn from_images(frames: Vec<RasterImage>, fps: f64, audio: Option<AudioBuffer>) -> Result<Self> {
        let frames = frames.into_iter().map(|f| FrameSource::Memory(Arc::new(f))).collect();
        Self::new(frames, fps, audio)
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn duration_secs(&self) -> f64 {
        self.frames.len() as f64 / self.fps
    }

    /// Decodes frame `index` on demand.
    pub fn frame(&self, index: usize) -> Result<Arc<RasterImage>> {
        match self.frames.get(index) {
            Some(FrameSource::Memory(img)) => Ok(Arc::clone(img)),
            Some(FrameSource::Path(p)) => Ok(Arc::new(load_image(p)?)),
            None => Err(Error::MissingFrame { index, path: String::new() }),
        }
    }
}

pub fn load_video_manifest(path: &Path) -> Result<VideoDocument> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::InvalidData => corrupt("manifest is not UTF-8"),
        _ => Error::Io(e),
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_manifest(&text, base)
}

pub fn parse_manifest(text: &str, base: &Path) -> Result<VideoDocument> {
    let mut fps = None;
    let mut frames_dir = None;
    let mut audio = None;
    let mut count = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| corrupt(format!("manifest line {}: expected key=value", lineno + 1)))?;
        let value = value.trim();
        match key.trim() {
            "fps" => {
                fps = Some(value.parse::<f64>().map_err(|_| corrupt(format!("bad fps `{value}`")))?)
            }
            "frames" => frames_dir = Some(base.join(value)),
            "audio" => {
                audio = match value {
                    "" | "none" => None,
                    p => Some(base.join(p)),
                }
            }
            "count" => {
                count = Some(value.parse::<usize>().map_err(|_| corrupt(format!("bad count `{value}`")))?)
            }
            other => return Err(corrupt(format!("unknown manifest key `{other}`"))),
        }
    }
    let fps = fps.ok_or_else(|| corrupt("manifest lacks fps"))?;
    let dir = frames_dir.ok_or_else(|| corrupt("manifest lacks frames"))?;

    let mut indexed = BTreeMap::new();
    for entry in std::fs::read_dir(&dir)? {
        let p = entry?.path();
        let ext = p.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if !matches!(ext.as_deref(), Some("png" | "ppm")) {
            continue;
        }
        if let Some(i) = p.file_stem().and_then(|s| s.to_str()).and_then(|s| s.parse::<usize>().ok()) {
            indexed.insert(i, p);
        }
    }
    let count = count.unwrap_or_else(|| indexed.keys().next_back().map_or(0, |&m| m + 1));
    let mut frames = Vec::with_capacity(count);
    for index in 0..count {
        match indexed.remove(&index) {
            Some(p) => frames.push(FrameSource::Path(p)),
            None => {
                return Err(Error::MissingFrame {
                    index,
                    path: dir.join(format!("{index}.png")).display().to_string(),
                })
            }
        }
    }
    let audio = audio.map(|p| load_audio(&p)).transpose()?;
    VideoDocument::new(frames, fps, audio)
}
