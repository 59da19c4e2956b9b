//! Decoding of the supported ingest formats and the object catalog row.

mod audio;
mod image;
mod mesh;
mod video;

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use self::audio::{decode_wav, encode_wav, load_audio, AudioBuffer, TARGET_SAMPLE_RATE};
pub use self::image::{decode_image, encode_png, load_image, RasterImage};
pub(crate) use self::image::resample_bilinear;
pub use self::mesh::{encode_obj, load_mesh, parse_obj, TriangleMesh};
pub use self::video::{load_video_manifest, parse_manifest, FrameSource, VideoDocument};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MediaType {
    Image,
    Audio,
    Video,
    #[serde(rename = "MODEL_3D")]
    Model3d,
}

impl MediaType {
    pub fn as_str(self) -> &'static str {
        match self {
            MediaType::Image => "IMAGE",
            MediaType::Audio => "AUDIO",
            MediaType::Video => "VIDEO",
            MediaType::Model3d => "MODEL_3D",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "IMAGE" => Some(MediaType::Image),
            "AUDIO" => Some(MediaType::Audio),
            "VIDEO" => Some(MediaType::Video),
            "MODEL_3D" | "MODEL3D" | "MESH" => Some(MediaType::Model3d),
            _ => None,
        }
    }

    /// Guesses the media type from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "png" | "ppm" => Some(MediaType::Image),
            "wav" => Some(MediaType::Audio),
            "obj" => Some(MediaType::Model3d),
            "manifest" | "video" => Some(MediaType::Video),
            _ => None,
        }
    }
}

impl fmt::Display for MediaType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MediaObject {
    pub object_id: String,
    pub media_type: MediaType,
    pub path: PathBuf,
    pub name: String,
    pub size: u64,
}

impl MediaObject {
    /// Builds the catalog row for a file, deriving the id from its bytes.
    pub fn from_file(path: &Path, media_type: MediaType) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        Ok(MediaObject {
            object_id: object_id_for_bytes(&bytes),
            media_type,
            path: path.to_path_buf(),
            name,
            size: bytes.len() as u64,
        })
    }
}

/// Hex of the first 128 bits of the SHA-256 digest of `bytes`.
pub fn object_id_for_bytes(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest[..16].iter().map(|b| format!("{b:02x}")).collect()
}

pub(crate) fn corrupt(msg: impl Into<String>) -> Error {
    Error::CorruptFile(msg.into())
}
