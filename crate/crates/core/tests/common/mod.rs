#![allow(dead_code)]

use std::path::{Path, PathBuf};

use polyseek::ingest::{ingest_paths, IngestReport};
use polyseek::media::{encode_png, encode_wav, AudioBuffer, RasterImage, TriangleMesh};
use polyseek::store::Store;
use polyseek::EngineConfig;
use tempfile::TempDir;

/// A store in a temporary directory plus the files it was built from.
pub struct Fixture {
    pub tmp: TempDir,
    pub config: EngineConfig,
    pub store: Store,
}

impl Fixture {
    /// Small codebook so tests stay fast.
    pub fn new() -> Self {
        Self::with_config(|c| c.ingest.codebook_k = 64)
    }

    pub fn with_config(adjust: impl FnOnce(&mut EngineConfig)) -> Self {
        let tmp = TempDir::new().unwrap();
        let mut config = EngineConfig::default();
        adjust(&mut config);
        config.data_dir = tmp.path().join("db");
        let store = Store::open(&config.data_dir).unwrap();
        Fixture { tmp, config, store }
    }

    pub fn media_dir(&self) -> PathBuf {
        let d = self.tmp.path().join("media");
        std::fs::create_dir_all(&d).unwrap();
        d
    }

    pub fn ingest(&mut self, paths: &[PathBuf]) -> IngestReport {
        let report = ingest_paths(&mut self.store, &self.config, paths).unwrap();
        assert!(report.failures.is_empty(), "{:?}", report.failures);
        report
    }

    /// Ingests the files and returns the first segment id of each, in order.
    pub fn ingest_segments(&mut self, paths: &[PathBuf]) -> Vec<String> {
        let report = self.ingest(paths);
        report.objects.iter().map(|o| format!("{}.0", o.object_id)).collect()
    }

    pub fn add_images(&mut self, images: &[RasterImage]) -> Vec<String> {
        let dir = self.media_dir();
        let paths: Vec<PathBuf> =
            images.iter().enumerate().map(|(i, img)| write(&dir, &format!("img{i:04}.png"), &encode_png(img))).collect();
        self.ingest_segments(&paths)
    }

    pub fn add_audio(&mut self, tracks: &[AudioBuffer]) -> Vec<String> {
        let dir = self.media_dir();
        let paths: Vec<PathBuf> =
            tracks.iter().enumerate().map(|(i, a)| write(&dir, &format!("track{i:04}.wav"), &encode_wav(a))).collect();
        self.ingest(&paths).objects.iter().map(|o| o.object_id.clone()).collect()
    }

    pub fn add_meshes(&mut self, meshes: &[(String, TriangleMesh)]) -> Vec<String> {
        let dir = self.media_dir();
        let paths: Vec<PathBuf> =
            meshes.iter().map(|(name, m)| write(&dir, &format!("{name}.obj"), to_obj(m).as_bytes())).collect();
        self.ingest_segments(&paths)
    }
}

pub fn write(dir: &Path, name: &str, bytes: &[u8]) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, bytes).unwrap();
    p
}

pub fn to_obj(mesh: &TriangleMesh) -> String {
    polyseek::media::encode_obj(mesh)
}
