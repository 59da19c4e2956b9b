use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::media::AudioBuffer;

pub const WINDOW: usize = 4096;
pub const HOP: usize = 1024;
pub const BINS: usize = WINDOW / 2 + 1;

/// Magnitude STFT, frame-major: `magnitudes[frame * BINS + bin]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub sample_rate: u32,
    pub frame_count: usize,
    pub magnitudes: Vec<f64>,
}

impl Spectrogram {
    pub fn frame(&self, i: usize) -> &[f64] {
        &self.magnitudes[i * BINS..(i + 1) * BINS]
    }

    pub fn frames(&self) -> impl Iterator<Item = &[f64]> {
        self.magnitudes.chunks_exact(BINS)
    }

    /// Centre frequency of `bin` in Hz.
    pub fn bin_hz(&self, bin: f64) -> f64 {
        bin * self.sample_rate as f64 / WINDOW as f64
    }

    pub fn frames_per_second(&self) -> f64 {
        self.sample_rate as f64 / HOP as f64
    }
}

/// Periodic Hann window of length [`WINDOW`].
pub fn hann_window() -> Vec<f64> {
    (0..WINDOW)
        .map(|n| 0.5 * (1.0 - (2.0 * PI * n as f64 / WINDOW as f64).cos()))
        .collect()
}

/// Hann-windowed magnitude STFT (4096-sample window, hop 1024). Input shorter
/// than one window is zero-padded to a single frame.
pub fn stft(audio: &AudioBuffer) -> Spectrogram {
    let samples = &audio.samples;
    let frame_count = if samples.len() <= WINDOW { 1 } else { 1 + (samples.len() - WINDOW) / HOP };
    let window = hann_window();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(WINDOW);
    let mut buf = vec![Complex::new(0.0, 0.0); WINDOW];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut magnitudes = Vec::with_capacity(frame_count * BINS);
    for f in 0..frame_count {
        let start = f * HOP;
        for (n, slot) in buf.iter_mut().enumerate() {
            let s = samples.get(start + n).copied().unwrap_or(0.0) as f64;
            *slot = Complex::new(s * window[n], 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        magnitudes.extend(buf[..BINS].iter().map(|c| c.norm()));
    }
    Spectrogram { sample_rate: audio.sample_rate, frame_count, magnitudes }
}
