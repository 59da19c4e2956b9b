//! Splitting decoded media into retrieval units.
//!
//! Videos are cut into shots with a grayscale histogram-difference detector,
//! audio into fixed overlapping windows, and images and meshes are a single
//! segment each.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::media::{AudioBuffer, MediaObject, MediaType, RasterImage, VideoDocument, TARGET_SAMPLE_RATE};

pub const HISTOGRAM_BINS: usize = 32;
pub const SHOT_THRESHOLD: f64 = 0.35;
pub const MIN_SHOT_FRAMES: usize = 5;
pub const AUDIO_WINDOW: usize = 10 * TARGET_SAMPLE_RATE as usize;
pub const AUDIO_HOP: usize = 9 * TARGET_SAMPLE_RATE as usize;
pub const AUDIO_MIN_TAIL: usize = TARGET_SAMPLE_RATE as usize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub segment_id: String,
    pub object_id: String,
    pub sequence_number: u32,
    /// Frame index for video, sample index for audio, `0` otherwise.
    pub start: u64,
    /// Exclusive end; `1` for single-segment images and meshes.
    pub end: u64,
}

impl SegmentRecord {
    pub fn new(object_id: &str, sequence_number: u32, start: u64, end: u64) -> Self {
        SegmentRecord {
            segment_id: segment_id(object_id, sequence_number),
            object_id: object_id.to_string(),
            sequence_number,
            start,
            end,
        }
    }
}

pub fn segment_id(object_id: &str, sequence_number: u32) -> String {
    format!("{object_id}.{sequence_number}")
}

/// Normalized 32-bin luma histogram of a frame.
pub fn gray_histogram(img: &RasterImage) -> [f64; HISTOGRAM_BINS] {
    let mut hist = [0.0; HISTOGRAM_BINS];
    for g in img.to_gray() {
        let bin = ((g * HISTOGRAM_BINS as f64 / 256.0) as usize).min(HISTOGRAM_BINS - 1);
        hist[bin] += 1.0;
    }
    let total = (img.width() * img.height()) as f64;
    hist.iter_mut().for_each(|h| *h /= total);
    hist
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Frame ranges `[start, end)` of the detected shots.
pub fn shot_boundaries(video: &VideoDocument) -> Result<Vec<(usize, usize)>> {
    let n = video.frame_count();
    let mut raw = Vec::new();
    let mut start = 0;
    let mut prev = gray_histogram(&*video.frame(0)?);
    for i in 1..n {
        let cur = gray_histogram(&*video.frame(i)?);
        if l1(&prev, &cur) > SHOT_THRESHOLD {
            raw.push((start, i));
            start = i;
        }
        prev = cur;
    }
    raw.push((start, n));
    Ok(merge_short_shots(raw))
}

/// Shots under the minimum length join the preceding shot; a short first shot
/// joins the one after it.
fn merge_short_shots(raw: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    let mut merged: Vec<(usize, usize)> = Vec::with_capacity(raw.len());
    for (s, e) in raw {
        match merged.last_mut() {
            Some(last) if e - s < MIN_SHOT_FRAMES => last.1 = e,
            _ => merged.push((s, e)),
        }
    }
    if merged.len() > 1 && merged[0].1 - merged[0].0 < MIN_SHOT_FRAMES {
        let first = merged.remove(0);
        merged[0].0 = first.0;
    }
    merged
}

pub fn segment_video_shots(object_id: &str, video: &VideoDocument) -> Result<Vec<SegmentRecord>> {
    Ok(shot_boundaries(video)?
        .into_iter()
        .enumerate()
        .map(|(i, (s, e))| SegmentRecord::new(object_id, i as u32, s as u64, e as u64))
        .collect())
}

/// Sample ranges of the 10 s / 9 s-hop windows. A trailing partial window is
/// kept only when it covers at least 1 s not already covered by a full window.
/// Audio shorter than one window is a single segment.
pub fn audio_windows(len: usize) -> Vec<(usize, usize)> {
    if len <= AUDIO_WINDOW {
        return vec![(0, len)];
    }
    let mut windows = Vec::new();
    let mut start = 0;
    while start + AUDIO_WINDOW <= len {
        windows.push((start, start + AUDIO_WINDOW));
        start += AUDIO_HOP;
    }
    let covered = windows.last().map_or(0, |w| w.1);
    if len - covered >= AUDIO_MIN_TAIL {
        windows.push((start, len));
    }
    windows
}

pub fn segment_audio_windows(object_id: &str, audio: &AudioBuffer) -> Vec<SegmentRecord> {
    audio_windows(audio.len())
        .into_iter()
        .enumerate()
        .map(|(i, (s, e))| SegmentRecord::new(object_id, i as u32, s as u64, e as u64))
        .collect()
}

pub fn trivial_segment(object: &MediaObject) -> Result<SegmentRecord> {
    match object.media_type {
        MediaType::Image | MediaType::Model3d => Ok(SegmentRecord::new(&object.object_id, 0, 0, 1)),
        other => Err(Error::WrongMediaType {
            expected: "IMAGE or MODEL_3D".into(),
            actual: other.to_string(),
        }),
    }
}
