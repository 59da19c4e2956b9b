//! Music descriptors: chroma (HPCP, CENS) shingles, MFCC shingles and
//! constellation fingerprints.

mod chroma;
mod fingerprint;
mod mfcc;
mod shingle;
mod stft;

use serde::{Deserialize, Serialize};

pub use chroma::{
    cens, hpcp, pitch_class, smoothing_window, spectral_peaks, Chroma, ChromaSequence, ChromaVariant,
    CensParams,
};
pub use fingerprint::{constellation, fingerprint, local_maxima, pack, unpack, FingerprintHash, Peak};
pub use mfcc::{hz_to_mel, mel_filterbank, mel_to_hz, mfcc, mfcc_frames};
pub use shingle::{shingle, SHINGLE_HOP, SHINGLE_WIDTH};
pub use stft::{hann_window, stft, Spectrogram, BINS, HOP, WINDOW};

use crate::features::{CENS_SHINGLE, FINGERPRINT, HPCP_SHINGLE, MFCC_SHINGLE};
use crate::media::AudioBuffer;

/// The kind of audio query, which selects the feature modules consulted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AudioQueryCategory {
    Fingerprint,
    Matching,
    VersionId,
}

impl AudioQueryCategory {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "fingerprint" | "fingerprinting" => Some(Self::Fingerprint),
            "matching" | "audiomatching" => Some(Self::Matching),
            "versionid" | "version" | "versionidentification" => Some(Self::VersionId),
            _ => None,
        }
    }
}

/// Feature categories consulted for an audio query of the given kind.
pub fn audio_features_for_category(category: AudioQueryCategory) -> &'static [&'static str] {
    match category {
        AudioQueryCategory::Fingerprint => &[FINGERPRINT, MFCC_SHINGLE],
        AudioQueryCategory::Matching | AudioQueryCategory::VersionId => &[CENS_SHINGLE, HPCP_SHINGLE],
    }
}

/// Shingle geometry and CENS settings used by the extraction pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AudioParams {
    pub cens: CensParams,
    pub shingle_width: usize,
    pub shingle_hop: usize,
}

impl Default for AudioParams {
    fn default() -> Self {
        AudioParams {
            cens: CensParams { window: 41, downsample: 2 },
            shingle_width: SHINGLE_WIDTH,
            shingle_hop: SHINGLE_HOP,
        }
    }
}

/// All audio descriptors of one buffer, computed from a single spectrogram.
#[derive(Debug, Clone, Default)]
pub struct AudioFeatures {
    pub hpcp_shingles: Vec<Vec<f64>>,
    pub cens_shingles: Vec<Vec<f64>>,
    pub mfcc_shingles: Vec<Vec<f64>>,
    pub fingerprints: Vec<FingerprintHash>,
}

impl AudioFeatures {
    pub fn vectors(&self, category: &str) -> Option<&[Vec<f64>]> {
        match category {
            HPCP_SHINGLE => Some(&self.hpcp_shingles),
            CENS_SHINGLE => Some(&self.cens_shingles),
            MFCC_SHINGLE => Some(&self.mfcc_shingles),
            _ => None,
        }
    }
}

pub fn extract_audio_features(audio: &AudioBuffer, params: &AudioParams) -> AudioFeatures {
    let spec = stft(audio);
    let chroma = hpcp(&spec);
    let cens_seq = cens(&chroma, params.cens);
    AudioFeatures {
        hpcp_shingles: shingle(&chroma.frames, params.shingle_width, params.shingle_hop),
        cens_shingles: shingle(&cens_seq.frames, params.shingle_width, params.shingle_hop),
        mfcc_shingles: shingle(&mfcc_frames(&spec), params.shingle_width, params.shingle_hop),
        fingerprints: fingerprint(&spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn routing_follows_query_kind() {
        let fp = audio_features_for_category(AudioQueryCategory::Fingerprint);
        assert!(!fp.contains(&CENS_SHINGLE) && !fp.contains(&HPCP_SHINGLE));
        assert!(fp.contains(&FINGERPRINT));
        for kind in [AudioQueryCategory::Matching, AudioQueryCategory::VersionId] {
            let set = audio_features_for_category(kind);
            assert!(!set.contains(&FINGERPRINT));
            assert!(set.contains(&CENS_SHINGLE) && set.contains(&HPCP_SHINGLE));
        }
        assert_eq!(AudioQueryCategory::parse("version-id"), Some(AudioQueryCategory::VersionId));
        assert_eq!(AudioQueryCategory::parse("humming"), None);
    }
}
