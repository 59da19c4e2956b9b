#![allow(dead_code)]

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use polyseek::ingest::ingest_paths;
use polyseek::media::{encode_obj, encode_png, encode_wav, RasterImage};
use polyseek::retrieval::{QuerySpec, ReferenceKind, TermSpec, TermType};
use polyseek::store::Store;
use polyseek::synth::{scene_image, tonal_track, ShapeClass};
use polyseek::EngineConfig;
use polyseek_server::{router, AppState, Engine};
use serde::Serialize;
use tempfile::TempDir;
use tower::ServiceExt;

pub const TRACK_SECS: f64 = 12.0;

fn write(dir: &Path, name: &str, bytes: &[u8]) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, bytes).unwrap();
    p
}

/// Two images, a 12 s track, a mesh and a two-shot video manifest.
pub fn fixture_corpus(dir: &Path) -> Vec<PathBuf> {
    std::fs::create_dir_all(dir.join("frames")).unwrap();
    for i in 0..20 {
        let img = if i < 10 { scene_image(30) } else { RasterImage::filled(96, 64, [20, 40, 200]) };
        write(&dir.join("frames"), &format!("{i}.png"), &encode_png(&img));
    }
    vec![
        write(dir, "harbour.png", &encode_png(&scene_image(1))),
        write(dir, "meadow.png", &encode_png(&scene_image(2).resize(300, 200))),
        write(dir, "theme.wav", &encode_wav(&tonal_track(3, TRACK_SECS))),
        write(dir, "block.obj", encode_obj(&ShapeClass::Cube.instance(1)).as_bytes()),
        write(dir, "clip.video", b"fps=10\nframes=frames/\naudio=none\n"),
    ]
}

pub struct Setup {
    pub tmp: TempDir,
    pub config: EngineConfig,
    pub files: Vec<PathBuf>,
}

impl Setup {
    /// Ingested fixture corpus with a small codebook.
    pub fn new() -> Self {
        Self::with_config(|_| {})
    }

    pub fn with_config(adjust: impl FnOnce(&mut EngineConfig)) -> Self {
        let tmp = TempDir::new().unwrap();
        let mut config = EngineConfig::default();
        config.ingest.codebook_k = 16;
        config.data_dir = tmp.path().join("db");
        adjust(&mut config);
        let files = fixture_corpus(&tmp.path().join("media"));
        let mut store = Store::open(&config.data_dir).unwrap();
        let report = ingest_paths(&mut store, &config, &files).unwrap();
        assert!(report.failures.is_empty(), "{:?}", report.failures);
        Setup { tmp, config, files }
    }

    pub fn state(&self) -> AppState {
        AppState::new(Engine::open(self.config.clone()).unwrap())
    }

    pub fn media(&self, name: &str) -> PathBuf {
        self.tmp.path().join("media").join(name)
    }

    pub fn image_query(&self, name: &str) -> QuerySpec {
        let bytes = std::fs::read(self.media(name)).unwrap();
        QuerySpec::single(TermSpec::inline(TermType::Image, ReferenceKind::Image, &bytes))
    }

    /// Id of the object ingested from `name`.
    pub fn object_id(&self, name: &str) -> String {
        polyseek::media::object_id_for_bytes(&std::fs::read(self.media(name)).unwrap())
    }
}

pub async fn send(state: &AppState, req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let resp = router(state.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

pub async fn get(state: &AppState, uri: &str) -> (StatusCode, Vec<u8>) {
    send(state, Request::get(uri).body(Body::empty()).unwrap()).await
}

pub async fn post(state: &AppState, uri: &str, body: &impl Serialize) -> (StatusCode, Vec<u8>) {
    let req = Request::post(uri)
        .header("content-type", "application/json")
        .body(Body::from(serde_json::to_vec(body).unwrap()))
        .unwrap();
    send(state, req).await
}

pub fn json<T: serde::de::DeserializeOwned>(bytes: &[u8]) -> T {
    serde_json::from_slice(bytes).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(bytes)))
}

/// Serves the router on an ephemeral local port.
pub async fn spawn(state: AppState) -> SocketAddr {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, router(state)).await.unwrap() });
    addr
}
