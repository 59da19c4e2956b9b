//! Pitch-class profiles: HPCP from spectral peaks and CENS smoothing on top.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::stft::Spectrogram;

pub type Chroma = [f64; 12];

/// Spectral peaks below this fraction of the frame maximum are ignored.
pub const PEAK_FLOOR: f64 = 1e-4;
pub const MIN_HZ: f64 = 100.0;
pub const MAX_HZ: f64 = 5000.0;
/// Half-width, in semitones, of the cos² weighting window around a pitch class
/// (the window spans 4/3 semitones in total).
pub const WEIGHT_HALF_WIDTH: f64 = 2.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChromaVariant {
    Hpcp,
    Cens,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChromaSequence {
    pub variant: ChromaVariant,
    pub frames: Vec<Chroma>,
}

/// Local maxima of a magnitude frame above the relative floor, as
/// `(interpolated bin, interpolated magnitude)`.
pub fn spectral_peaks(frame: &[f64]) -> Vec<(f64, f64)> {
    let max = frame.iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let floor = PEAK_FLOOR * max;
    let mut peaks = Vec::new();
    for k in 1..frame.len() - 1 {
        let (a, b, c) = (frame[k - 1], frame[k], frame[k + 1]);
        if b > floor && b > a && b >= c {
            // Parabolic interpolation on log magnitude.
            if a > 0.0 && c > 0.0 {
                let (la, lb, lc) = (a.ln(), b.ln(), c.ln());
                let denom = la - 2.0 * lb + lc;
                let delta = if denom != 0.0 { 0.5 * (la - lc) / denom } else { 0.0 };
                peaks.push((k as f64 + delta, (lb - 0.25 * (la - lc) * delta).exp()));
            } else {
                peaks.push((k as f64, b));
            }
        }
    }
    peaks
}

/// Fractional pitch class of `hz` with C = 0 and A4 = 440 Hz at 9.
pub fn pitch_class(hz: f64) -> f64 {
    (12.0 * (hz / 440.0).log2() + 9.0).rem_euclid(12.0)
}

fn hpcp_frame(spec: &Spectrogram, frame: &[f64]) -> Chroma {
    let mut chroma = [0.0; 12];
    for (bin, mag) in spectral_peaks(frame) {
        let hz = spec.bin_hz(bin);
        if !(MIN_HZ..=MAX_HZ).contains(&hz) {
            continue;
        }
        let pc = pitch_class(hz);
        let weight = mag * mag;
        for (c, slot) in chroma.iter_mut().enumerate() {
            let d = (pc - c as f64).abs();
            let d = d.min(12.0 - d);
            if d <= WEIGHT_HALF_WIDTH {
                *slot += weight * (PI * d / (2.0 * WEIGHT_HALF_WIDTH)).cos().powi(2);
            }
        }
    }
    let max = chroma.iter().cloned().fold(0.0, f64::max);
    if max > 0.0 {
        chroma.iter_mut().for_each(|v| *v /= max);
    }
    chroma
}

/// Harmonic pitch class profile per frame, max-normalised (silence stays zero).
pub fn hpcp(spec: &Spectrogram) -> ChromaSequence {
    ChromaSequence {
        variant: ChromaVariant::Hpcp,
        frames: spec.frames().map(|f| hpcp_frame(spec, f)).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensParams {
    /// Length of the Hann smoothing window, in frames.
    pub window: usize,
    pub downsample: usize,
}

impl Default for CensParams {
    fn default() -> Self {
        CensParams { window: 41, downsample: 10 }
    }
}

const CENS_THRESHOLDS: [f64; 4] = [0.05, 0.1, 0.2, 0.4];

fn quantize(v: f64) -> f64 {
    CENS_THRESHOLDS.iter().filter(|&&t| v >= t).count() as f64
}

/// Hann window without the zero end points: `0.5 (1 - cos(2π (i + 1) / (n + 1)))`.
pub fn smoothing_window(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 * (1.0 - (2.0 * PI * (i + 1) as f64 / (n + 1) as f64).cos()))
        .collect()
}

/// CENS: L1-normalise, quantise, smooth with a Hann window over time,
/// downsample and L2-normalise each output frame.
pub fn cens(chroma: &ChromaSequence, params: CensParams) -> ChromaSequence {
    let quantized: Vec<Chroma> = chroma
        .frames
        .iter()
        .map(|f| {
            let sum: f64 = f.iter().map(|v| v.abs()).sum();
            if sum > 0.0 {
                f.map(|v| quantize(v / sum))
            } else {
                [0.0; 12]
            }
        })
        .collect();
    let win = smoothing_window(params.window);
    let half = (params.window / 2) as isize;
    let n = quantized.len() as isize;
    let mut frames = Vec::new();
    let mut t = 0isize;
    while t < n {
        let mut out = [0.0; 12];
        for (j, w) in win.iter().enumerate() {
            let src = t + j as isize - half;
            if (0..n).contains(&src) {
                let q = &quantized[src as usize];
                for c in 0..12 {
                    out[c] += w * q[c];
                }
            }
        }
        let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            out.iter_mut().for_each(|v| *v /= norm);
        }
        frames.push(out);
        t += params.downsample as isize;
    }
    ChromaSequence { variant: ChromaVariant::Cens, frames }
}
