//! Engine configuration, read from a TOML file. Every key is optional.
//!
//! ```toml
//! data_dir = "data"
//!
//! [server]
//! port = 8080
//! token = "secret"          # omit to disable auth
//! timeout_secs = 30
//! max_upload_bytes = 33554432
//!
//! [ingest]
//! codebook_k = 512
//! codebook_seed = 42
//! calibration_pairs = 1000
//! calibration_seed = 42
//!
//! [index]
//! va_bits = 6
//! lsh_tables = 8
//! lsh_projections = 8
//! lsh_width = 4.0
//! lsh_seed = 42
//!
//! [audio]
//! cens_window = 41
//! cens_downsample = 2
//! shingle_width = 30
//! shingle_hop = 10
//!
//! [retrieval]
//! default_k = 100
//! fetch_factor = 4
//! session_ttl_secs = 900
//! strategy = "auto"         # exact | va | lsh | auto
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::audio::{AudioParams, CensParams};
use crate::store::{LshParams, SearchStrategy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub data_dir: PathBuf,
    pub server: ServerConfig,
    pub ingest: IngestConfig,
    pub index: IndexConfig,
    pub audio: AudioConfig,
    pub retrieval: RetrievalConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub port: u16,
    pub token: Option<String>,
    pub timeout_secs: u64,
    pub max_upload_bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub codebook_k: usize,
    pub codebook_seed: u64,
    pub calibration_pairs: usize,
    pub calibration_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IndexConfig {
    pub va_bits: u8,
    pub lsh_tables: usize,
    pub lsh_projections: usize,
    pub lsh_width: f64,
    pub lsh_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AudioConfig {
    pub cens_window: usize,
    pub cens_downsample: usize,
    pub shingle_width: usize,
    pub shingle_hop: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrievalConfig {
    pub default_k: usize,
    pub fetch_factor: usize,
    pub session_ttl_secs: u64,
    pub strategy: SearchStrategy,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            data_dir: PathBuf::from("data"),
            server: ServerConfig::default(),
            ingest: IngestConfig::default(),
            index: IndexConfig::default(),
            audio: AudioConfig::default(),
            retrieval: RetrievalConfig::default(),
        }
    }
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig { port: 8080, token: None, timeout_secs: 30, max_upload_bytes: 32 << 20 }
    }
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig { codebook_k: 512, codebook_seed: 42, calibration_pairs: 1000, calibration_seed: 42 }
    }
}

impl Default for IndexConfig {
    fn default() -> Self {
        let lsh = LshParams::default();
        IndexConfig {
            va_bits: crate::store::DEFAULT_VA_BITS,
            lsh_tables: lsh.tables,
            lsh_projections: lsh.projections,
            lsh_width: lsh.width,
            lsh_seed: lsh.seed,
        }
    }
}

impl Default for AudioConfig {
    fn default() -> Self {
        let p = AudioParams::default();
        AudioConfig {
            cens_window: p.cens.window,
            cens_downsample: p.cens.downsample,
            shingle_width: p.shingle_width,
            shingle_hop: p.shingle_hop,
        }
    }
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        RetrievalConfig { default_k: 100, fetch_factor: 4, session_ttl_secs: 15 * 60, strategy: SearchStrategy::Auto }
    }
}

impl EngineConfig {
    /// Parses TOML; relative `data_dir` resolves against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut config: EngineConfig =
            toml::from_str(text).map_err(|e| Error::InvalidQuery(format!("config: {e}")))?;
        if config.data_dir.is_relative() {
            config.data_dir = base.join(&config.data_dir);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidQuery(format!("config: {msg}")));
        if !(1..=8).contains(&self.index.va_bits) {
            return bad("index.va_bits must be in 1..=8");
        }
        if self.index.lsh_tables == 0 || self.index.lsh_projections == 0 || !(self.index.lsh_width > 0.0) {
            return bad("LSH parameters must be positive");
        }
        if self.audio.cens_window == 0 || self.audio.cens_downsample == 0 {
            return bad("audio CENS window and downsample must be positive");
        }
        if self.audio.shingle_width == 0 || self.audio.shingle_hop == 0 {
            return bad("audio shingle width and hop must be positive");
        }
        if self.retrieval.default_k == 0 || self.retrieval.fetch_factor == 0 {
            return bad("retrieval.default_k and fetch_factor must be positive");
        }
        if self.ingest.codebook_k < 2 {
            return bad("ingest.codebook_k must be at least 2");
        }
        Ok(())
    }

    pub fn audio_params(&self) -> AudioParams {
        AudioParams {
            cens: CensParams { window: self.audio.cens_window, downsample: self.audio.cens_downsample },
            shingle_width: self.audio.shingle_width,
            shingle_hop: self.audio.shingle_hop,
        }
    }

    pub fn lsh_params(&self) -> LshParams {
        LshParams {
            tables: self.index.lsh_tables,
            projections: self.index.lsh_projections,
            width: self.index.lsh_width,
            seed: self.index.lsh_seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = EngineConfig::parse("", Path::new("/srv")).unwrap();
        assert_eq!(c.data_dir, PathBuf::from("/srv/data"));
        assert_eq!(c.server.max_upload_bytes, 32 * 1024 * 1024);
        assert_eq!(c.server.timeout_secs, 30);
        assert_eq!(c.lsh_params(), LshParams::default());
        assert_eq!(c.audio_params(), AudioParams::default());
        assert_eq!(c.retrieval.session_ttl_secs, 900);
    }

    #[test]
    fn overrides_and_validation() {
        let c = EngineConfig::parse(
            "data_dir = \"/tmp/x\"\n[server]\ntoken = \"t\"\n[retrieval]\nstrategy = \"exact\"\n",
            Path::new("/"),
        )
        .unwrap();
        assert_eq!(c.server.token.as_deref(), Some("t"));
        assert_eq!(c.retrieval.strategy, SearchStrategy::Exact);
        assert!(EngineConfig::parse("[index]\nva_bits = 9\n", Path::new("/")).is_err());
        assert!(EngineConfig::parse("bogus = 1\n", Path::new("/")).is_err());
    }

    #[test]
    fn defaults_round_trip_through_toml() {
        let c = EngineConfig::default();
        let text = toml::to_string(&c).unwrap();
        assert_eq!(EngineConfig::parse(&text, Path::new("/")).unwrap().server, c.server);
    }
}
