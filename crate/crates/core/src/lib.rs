//! Content-based retrieval over images, audio, video and 3D meshes.

pub mod config;
pub mod error;
pub mod eval;
pub mod features;
pub mod ingest;
pub mod media;
pub mod retrieval;
pub mod segment;
pub mod store;
pub mod synth;

pub use config::EngineConfig;
pub use error::{Error, Result};
