use std::io::Cursor;
use std::path::Path;

use super::corrupt;
use crate::error::{Error, Result};

/// Every decoded buffer is resampled to this rate before feature extraction.
pub const TARGET_SAMPLE_RATE: u32 = 22050;

#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub sample_rate: u32,
    pub samples: Vec<f32>,
}

impl AudioBuffer {
    pub fn new(sample_rate: u32, samples: Vec<f32>) -> Self {
        AudioBuffer { sample_rate, samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Copy of the samples in `[start, end)`, clamped to the buffer.
    pub fn slice(&self, start: usize, end: usize) -> AudioBuffer {
        let end = end.min(self.samples.len());
        let start = start.min(end);
        AudioBuffer::new(self.sample_rate, self.samples[start..end].to_vec())
    }
}

pub fn load_audio(path: &Path) -> Result<AudioBuffer> {
    let bytes = std::fs::read(path)?;
    decode_wav(&bytes)
}

/// Decodes 16-bit PCM WAV (mono or stereo) into a mono 22050 Hz buffer.
pub fn decode_wav(bytes: &[u8]) -> Result<AudioBuffer> {
    if bytes.len() < 12 || &bytes[..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::UnsupportedFormat("not a RIFF/WAVE file".into()));
    }
    let reader = hound::WavReader::new(Cursor::new(bytes)).map_err(map_hound)?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::UnsupportedFormat(format!(
            "{:?} {}-bit audio (only PCM16 is supported)",
            spec.sample_format, spec.bits_per_sample
        )));
    }
    if !(1..=2).contains(&spec.channels) {
        return Err(Error::UnsupportedFormat(format!("{} channels", spec.channels)));
    }
    if spec.sample_rate == 0 {
        return Err(corrupt("wav: zero sample rate"));
    }
    let raw: Vec<i16> = reader
        .into_samples::<i16>()
        .collect::<std::result::Result<_, _>>()
        .map_err(map_hound)?;
    let channels = spec.channels as usize;
    let mono: Vec<f64> = raw
        .chunks_exact(channels)
        .map(|frame| frame.iter().map(|&s| s as f64 / 32768.0).sum::<f64>() / channels as f64)
        .collect();
    let samples = resample_linear(&mono, spec.sample_rate, TARGET_SAMPLE_RATE);
    Ok(AudioBuffer::new(TARGET_SAMPLE_RATE, samples))
}

fn map_hound(e: hound::Error) -> Error {
    match e {
        hound::Error::Unsupported => Error::UnsupportedFormat("wav: unsupported encoding".into()),
        hound::Error::IoError(e) => corrupt(format!("wav: {e}")),
        other => corrupt(format!("wav: {other}")),
    }
}

/// Output length is `round(n * to / from)`; sample `i` is read at source position `i * from / to`.
fn resample_linear(src: &[f64], from: u32, to: u32) -> Vec<f32> {
    if from == to {
        return src.iter().map(|&s| s as f32).collect();
    }
    if src.is_empty() {
        return Vec::new();
    }
    let out_len = (src.len() as f64 * to as f64 / from as f64).round() as usize;
    let step = from as f64 / to as f64;
    let last = src.len() - 1;
    (0..out_len)
        .map(|i| {
            let pos = i as f64 * step;
            let i0 = (pos.floor() as usize).min(last);
            let i1 = (i0 + 1).min(last);
            let t = pos - i0 as f64;
            (src[i0] * (1.0 - t) + src[i1] * t) as f32
        })
        .collect()
}

/// Encodes mono PCM16 WAV; samples are scaled by 32768 and clamped.
pub fn encode_wav(audio: &AudioBuffer) -> Vec<u8> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: audio.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut cursor = Cursor::new(Vec::new());
    {
        let mut writer = hound::WavWriter::new(&mut cursor, spec).expect("in-memory writer");
        for &s in &audio.samples {
            let v = (s as f64 * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
            writer.write_sample(v).expect("in-memory writer");
        }
        writer.finalize().expect("in-memory writer");
    }
    cursor.into_inner()
}
