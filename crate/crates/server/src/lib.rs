//! HTTP and WebSocket front end of the retrieval engine.

pub mod api;
pub mod preview;
pub mod remote;
mod routes;
mod ws;

use std::sync::{Arc, RwLock};
use std::time::Duration;

use polyseek::retrieval::{PathPolicy, QuerySpec, Retriever};
use polyseek::store::Store;
use polyseek::{EngineConfig, Result};

pub use api::{ApiError, PROTOCOL_VERSION};
pub use routes::router;

/// Store, retriever and configuration shared by every request.
///
/// Queries take the store's read lock; ingest and index builds take the
/// write lock, so they are serialized against each other and against queries.
pub struct Engine {
    pub config: EngineConfig,
    pub store: RwLock<Store>,
    pub retriever: Retriever,
}

impl Engine {
    pub fn open(config: EngineConfig) -> Result<Self> {
        let store = Store::open(&config.data_dir)?;
        Ok(Engine { retriever: Retriever::new(&config), store: RwLock::new(store), config })
    }

    pub fn read(&self) -> std::sync::RwLockReadGuard<'_, Store> {
        self.store.read().unwrap_or_else(|e| e.into_inner())
    }

    pub fn write(&self) -> std::sync::RwLockWriteGuard<'_, Store> {
        self.store.write().unwrap_or_else(|e| e.into_inner())
    }
}

#[derive(Clone)]
pub struct AppState {
    pub engine: Arc<Engine>,
}

impl AppState {
    pub fn new(engine: Engine) -> Self {
        AppState { engine: Arc::new(engine) }
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.engine.config.server.timeout_secs)
    }

    /// Runs `work` on the blocking pool under the configured timeout.
    ///
    /// A timed-out job keeps running to completion in the background; only
    /// the response is abandoned.
    pub async fn run<T, F>(&self, work: F) -> std::result::Result<T, ApiError>
    where
        T: Send + 'static,
        F: FnOnce(&Engine) -> Result<T> + Send + 'static,
    {
        let engine = Arc::clone(&self.engine);
        let job = tokio::task::spawn_blocking(move || work(&engine));
        match tokio::time::timeout(self.timeout(), job).await {
            Err(_) => Err(ApiError::timeout()),
            Ok(Err(join)) => Err(ApiError::new(
                axum::http::StatusCode::INTERNAL_SERVER_ERROR,
                "INTERNAL",
                format!("worker failed: {join}"),
            )),
            Ok(Ok(result)) => result.map_err(ApiError::from),
        }
    }

    /// Rejects inline references larger than the upload limit.
    pub fn check_reference_sizes(&self, spec: &QuerySpec) -> std::result::Result<(), ApiError> {
        let limit = self.engine.config.server.max_upload_bytes;
        let too_big = spec
            .components
            .iter()
            .flat_map(|c| &c.terms)
            .filter_map(|t| t.data.as_deref())
            .any(|d| api::decoded_len(d) > limit);
        if too_big {
            return Err(ApiError::too_large(limit));
        }
        Ok(())
    }
}

/// Request bodies carry base64 (4/3 inflation) plus JSON framing.
pub fn body_limit(max_upload_bytes: usize) -> usize {
    max_upload_bytes / 3 * 4 + (1 << 20)
}

/// Query documents arriving over the network never name server files.
pub const NETWORK_PATHS: PathPolicy<'static> = PathPolicy::Deny;

/// Binds `port` on all interfaces and serves until the process ends.
pub async fn serve(state: AppState, port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state)).await
}

