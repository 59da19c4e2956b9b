//! Constellation fingerprints: spectral peak pairs packed into 32-bit hashes.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::stft::{Spectrogram, BINS};

/// Neighbourhood half-extent in frames (15 frames total).
pub const PEAK_TIME_RADIUS: usize = 7;
/// Neighbourhood half-extent in bins (31 bins total).
pub const PEAK_BIN_RADIUS: usize = 15;
pub const PEAKS_PER_SECOND: usize = 5;
pub const FAN_OUT: usize = 5;
pub const MAX_DT: u32 = 100;
pub const MAX_BIN_DELTA: u32 = 128;
pub const MAX_PEAK_BIN: u32 = 1023;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FingerprintHash {
    pub hash: u32,
    /// Frame index of the anchor peak.
    pub anchor_time: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub frame: u32,
    pub bin: u32,
    pub magnitude: f64,
}

/// Packs `f1` (10 bits), `f2` (10 bits) and `dt` (12 bits).
pub fn pack(f1: u32, f2: u32, dt: u32) -> u32 {
    debug_assert!(f1 < 1024 && f2 < 1024 && (1..4096).contains(&dt));
    (f1 << 22) | (f2 << 12) | dt
}

pub fn unpack(hash: u32) -> (u32, u32, u32) {
    (hash >> 22, (hash >> 12) & 0x3ff, hash & 0xfff)
}

/// Sliding-window maximum with radius `r` (window `2r + 1`), truncated at the ends.
fn sliding_max(values: &[f64], r: usize, out: &mut [f64]) {
    let n = values.len();
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for i in 0..n {
        let hi = (i + r).min(n - 1);
        while next <= hi {
            while dq.back().is_some_and(|&j| values[j] <= values[next]) {
                dq.pop_back();
            }
            dq.push_back(next);
            next += 1;
        }
        while dq.front().is_some_and(|&j| j + r < i) {
            dq.pop_front();
        }
        out[i] = values[*dq.front().expect("window is never empty")];
    }
}

/// Points that are the maximum of their 15-frame × 31-bin neighbourhood.
pub fn local_maxima(spec: &Spectrogram) -> Vec<Peak> {
    let frames = spec.frame_count;
    let mut freq_max = vec![0.0; frames * BINS];
    for t in 0..frames {
        sliding_max(spec.frame(t), PEAK_BIN_RADIUS, &mut freq_max[t * BINS..(t + 1) * BINS]);
    }
    let mut column = vec![0.0; frames];
    let mut column_max = vec![0.0; frames];
    let mut peaks = Vec::new();
    for k in 0..BINS {
        for t in 0..frames {
            column[t] = freq_max[t * BINS + k];
        }
        sliding_max(&column, PEAK_TIME_RADIUS, &mut column_max);
        for t in 0..frames {
            let m = spec.magnitudes[t * BINS + k];
            if m > 0.0 && m == column_max[t] {
                peaks.push(Peak { frame: t as u32, bin: k as u32, magnitude: m });
            }
        }
    }
    peaks
}

/// The constellation: local maxima below the bin cap, strongest five per second.
pub fn constellation(spec: &Spectrogram) -> Vec<Peak> {
    let fps = spec.frames_per_second();
    let mut buckets: Vec<Vec<Peak>> = Vec::new();
    for p in local_maxima(spec).into_iter().filter(|p| p.bin <= MAX_PEAK_BIN) {
        let b = (p.frame as f64 / fps) as usize;
        if buckets.len() <= b {
            buckets.resize(b + 1, Vec::new());
        }
        buckets[b].push(p);
    }
    let mut kept: Vec<Peak> = buckets
        .into_iter()
        .flat_map(|mut b| {
            b.sort_by(|x, y| {
                y.magnitude
                    .total_cmp(&x.magnitude)
                    .then(x.frame.cmp(&y.frame))
                    .then(x.bin.cmp(&y.bin))
            });
            b.truncate(PEAKS_PER_SECOND);
            b
        })
        .collect();
    kept.sort_by_key(|p| (p.frame, p.bin));
    kept
}

/// Pairs every anchor with up to five later peaks within 100 frames and 128 bins.
pub fn fingerprint(spec: &Spectrogram) -> Vec<FingerprintHash> {
    let peaks = constellation(spec);
    let mut hashes = Vec::new();
    for (i, anchor) in peaks.iter().enumerate() {
        let targets = peaks[i + 1..]
            .iter()
            .take_while(|t| t.frame - anchor.frame <= MAX_DT)
            .filter(|t| t.frame > anchor.frame && t.bin.abs_diff(anchor.bin) <= MAX_BIN_DELTA)
            .take(FAN_OUT);
        for t in targets {
            hashes.push(FingerprintHash {
                hash: pack(anchor.bin, t.bin, t.frame - anchor.frame),
                anchor_time: anchor.frame,
            });
        }
    }
    hashes
}
