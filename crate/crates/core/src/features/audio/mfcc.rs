use std::f64::consts::PI;

use super::shingle::{shingle, SHINGLE_HOP, SHINGLE_WIDTH};
use super::stft::{Spectrogram, BINS, WINDOW};

pub const MEL_FILTERS: usize = 26;
pub const MEL_MAX_HZ: f64 = 8000.0;
pub const COEFFICIENTS: usize = 13;
const LOG_FLOOR: f64 = 1e-10;

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters over FFT bins, centres equally spaced on the mel scale
/// between 0 Hz and 8 kHz. Row `m` holds filter `m`'s weight for every bin.
pub fn mel_filterbank(sample_rate: u32) -> Vec<Vec<f64>> {
    let top = hz_to_mel(MEL_MAX_HZ);
    let edges: Vec<f64> = (0..MEL_FILTERS + 2)
        .map(|i| mel_to_hz(top * i as f64 / (MEL_FILTERS + 1) as f64))
        .collect();
    (0..MEL_FILTERS)
        .map(|m| {
            let (lo, centre, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            (0..BINS)
                .map(|k| {
                    let f = k as f64 * sample_rate as f64 / WINDOW as f64;
                    if f > lo && f <= centre {
                        (f - lo) / (centre - lo)
                    } else if f > centre && f < hi {
                        (hi - f) / (hi - centre)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// Cepstral coefficients 1..=13 per frame (the 0th is dropped).
pub fn mfcc_frames(spec: &Spectrogram) -> Vec<[f64; COEFFICIENTS]> {
    let bank = mel_filterbank(spec.sample_rate);
    spec.frames()
        .map(|frame| {
            let log_energy: Vec<f64> = bank
                .iter()
                .map(|w| {
                    let e: f64 = w.iter().zip(frame).map(|(w, m)| w * m * m).sum();
                    e.max(LOG_FLOOR).ln()
                })
                .collect();
            std::array::from_fn(|i| {
                let n = (i + 1) as f64;
                log_energy
                    .iter()
                    .enumerate()
                    .map(|(m, l)| l * (PI * n * (m as f64 + 0.5) / MEL_FILTERS as f64).cos())
                    .sum()
            })
        })
        .collect()
}

/// 390-d unit MFCC shingles (30 frames, hop 10).
pub fn mfcc(spec: &Spectrogram) -> Vec<Vec<f64>> {
    shingle(&mfcc_frames(spec), SHINGLE_WIDTH, SHINGLE_HOP)
}
