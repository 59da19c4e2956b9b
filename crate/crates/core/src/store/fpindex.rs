//! Inverted index from constellation hashes to `(segment, anchor time)` postings.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::binio::{Reader, Writer};
use crate::error::{Error, Result};
use crate::features::audio::FingerprintHash;

pub const FP_MAGIC: &[u8; 4] = b"FPIX";
/// Offsets within this many frames of each other vote together.
pub const OFFSET_BIN: i64 = 3;
pub const MIN_VOTES: u32 = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FingerprintMatch {
    pub segment_id: String,
    pub votes: u32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FingerprintIndex {
    segments: Vec<String>,
    positions: HashMap<String, u32>,
    /// Postings sorted by `(segment, anchor)`; segments are appended in order.
    postings: HashMap<u32, Vec<(u32, u32)>>,
}

impl FingerprintIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    pub fn hash_count(&self) -> usize {
        self.postings.len()
    }

    pub fn contains(&self, segment_id: &str) -> bool {
        self.positions.contains_key(segment_id)
    }

    /// Stored hashes of one segment, sorted by `(hash, anchor)`.
    pub fn hashes_of(&self, segment_id: &str) -> Vec<FingerprintHash> {
        let Some(&seg) = self.positions.get(segment_id) else { return Vec::new() };
        let mut out: Vec<FingerprintHash> = self
            .postings
            .iter()
            .flat_map(|(&hash, list)| {
                list.iter().filter(move |p| p.0 == seg).map(move |&(_, anchor_time)| FingerprintHash { hash, anchor_time })
            })
            .collect();
        out.sort_by_key(|h| (h.hash, h.anchor_time));
        out
    }

    pub fn insert(&mut self, segment_id: &str, hashes: &[FingerprintHash]) -> Result<()> {
        if self.contains(segment_id) {
            return Err(Error::DuplicateId(segment_id.to_string()));
        }
        let seg = self.segments.len() as u32;
        self.segments.push(segment_id.to_string());
        self.positions.insert(segment_id.to_string(), seg);
        let mut sorted = hashes.to_vec();
        sorted.sort_by_key(|h| (h.hash, h.anchor_time));
        for h in sorted {
            self.postings.entry(h.hash).or_default().push((seg, h.anchor_time));
        }
        Ok(())
    }

    /// Segments ranked by the size of their most populated offset window,
    /// ties by segment id; fewer than [`MIN_VOTES`] votes are dropped.
    pub fn lookup(&self, query: &[FingerprintHash]) -> Vec<FingerprintMatch> {
        let mut offsets: HashMap<u32, Vec<i64>> = HashMap::new();
        for q in query {
            for &(seg, anchor) in self.postings.get(&q.hash).map_or(&[][..], Vec::as_slice) {
                offsets.entry(seg).or_default().push(q.anchor_time as i64 - anchor as i64);
            }
        }
        let mut matches: Vec<FingerprintMatch> = offsets
            .into_iter()
            .map(|(seg, mut offs)| {
                offs.sort_unstable();
                FingerprintMatch { segment_id: self.segments[seg as usize].clone(), votes: densest_window(&offs) }
            })
            .filter(|m| m.votes >= MIN_VOTES)
            .collect();
        matches.sort_by(|a, b| b.votes.cmp(&a.votes).then_with(|| a.segment_id.cmp(&b.segment_id)));
        matches
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = Writer::new(FP_MAGIC, 1);
        w.u64(self.segments.len() as u64);
        for s in &self.segments {
            w.str(s)?;
        }
        let mut hashes: Vec<&u32> = self.postings.keys().collect();
        hashes.sort_unstable();
        w.u64(hashes.len() as u64);
        for h in hashes {
            let list = &self.postings[h];
            w.u32(*h);
            w.u32(list.len() as u32);
            for &(seg, anchor) in list {
                w.u32(seg);
                w.u32(anchor);
            }
        }
        w.commit(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        let (mut r, version) = Reader::open(&bytes, FP_MAGIC, "fingerprint index")?;
        if version != 1 {
            return Err(Error::UnsupportedFormat(format!("fingerprint index version {version}")));
        }
        let mut index = FingerprintIndex::new();
        for _ in 0..r.count(2)? {
            let id = r.str()?;
            let seg = index.segments.len() as u32;
            if index.positions.insert(id.clone(), seg).is_some() {
                return Err(Error::CorruptFile(format!("fingerprint index: duplicate segment {id}")));
            }
            index.segments.push(id);
        }
        for _ in 0..r.count(8)? {
            let hash = r.u32()?;
            let n = r.u32()? as usize;
            let mut list = Vec::with_capacity(n.min(1 << 16));
            for _ in 0..n {
                let seg = r.u32()?;
                if seg as usize >= index.segments.len() {
                    return Err(Error::CorruptFile("fingerprint index: segment out of range".into()));
                }
                list.push((seg, r.u32()?));
            }
            index.postings.insert(hash, list);
        }
        r.finish()?;
        Ok(index)
    }
}

/// Largest number of sorted offsets falling in any window `[o, o + OFFSET_BIN)`.
fn densest_window(sorted: &[i64]) -> u32 {
    let mut best = 0;
    let mut lo = 0;
    for hi in 0..sorted.len() {
        while sorted[hi] - sorted[lo] >= OFFSET_BIN {
            lo += 1;
        }
        best = best.max(hi - lo + 1);
    }
    best as u32
}
