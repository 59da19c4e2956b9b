//! Scenario runs against a live server over REST.

use std::collections::HashMap;
use std::path::Path;
use std::time::Duration;

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use polyseek::eval::{RankedItem, ScenarioEngine};
use polyseek::retrieval::{QueryOutcome, QuerySpec, RefineRequest};
use polyseek::store::CatalogEntry;
use polyseek::{Error, Result};
use reqwest::blocking::{Client, RequestBuilder};
use reqwest::StatusCode;
use serde::de::DeserializeOwned;

use crate::api::{ErrorResponse, RefineBody};

pub struct RemoteEngine {
    endpoint: String,
    token: Option<String>,
    client: Client,
    names: HashMap<String, String>,
}

/// Replaces file references with inline data, since the server reads none.
pub fn inline_references(spec: &QuerySpec, base: &Path) -> Result<QuerySpec> {
    let mut spec = spec.clone();
    for term in spec.components.iter_mut().flat_map(|c| &mut c.terms) {
        if let Some(path) = term.path.take() {
            if term.data.is_some() {
                return Err(Error::InvalidQuery("term has both data and path".into()));
            }
            term.data = Some(STANDARD.encode(std::fs::read(base.join(path))?));
        }
    }
    Ok(spec)
}

fn unreachable(e: reqwest::Error) -> Error {
    Error::EngineUnreachable(e.to_string())
}

impl RemoteEngine {
    /// `endpoint` is the server root, e.g. `http://localhost:8080`.
    pub fn new(endpoint: &str, token: Option<String>, timeout: Duration) -> Result<Self> {
        let client = Client::builder().timeout(timeout).build().map_err(unreachable)?;
        Ok(RemoteEngine { endpoint: endpoint.trim_end_matches('/').to_string(), token, client, names: HashMap::new() })
    }

    fn send<T: DeserializeOwned>(&self, req: RequestBuilder) -> Result<T> {
        let req = match &self.token {
            Some(t) => req.bearer_auth(t),
            None => req,
        };
        let resp = req.send().map_err(unreachable)?;
        let status = resp.status();
        if status.is_success() {
            return resp.json().map_err(|e| Error::InvalidQuery(format!("unexpected response: {e}")));
        }
        if status == StatusCode::UNAUTHORIZED {
            return Err(Error::EngineUnreachable("server rejected the token".into()));
        }
        let detail = resp
            .json::<ErrorResponse>()
            .map(|r| format!("{}: {}", r.error.code, r.error.message))
            .unwrap_or_else(|_| status.to_string());
        Err(match status {
            StatusCode::GONE => Error::SessionExpired(detail),
            StatusCode::NOT_FOUND => Error::UnknownId(detail),
            _ => Error::InvalidQuery(detail),
        })
    }

    fn name_of(&mut self, object_id: &str) -> Result<String> {
        if let Some(n) = self.names.get(object_id) {
            return Ok(n.clone());
        }
        let url = format!("{}/api/objects/{object_id}", self.endpoint);
        let name = match self.send::<CatalogEntry>(self.client.get(url))? {
            CatalogEntry::Object(r) => r.object.name,
            CatalogEntry::Segment(_) => String::new(),
        };
        self.names.insert(object_id.to_string(), name.clone());
        Ok(name)
    }
}

impl ScenarioEngine for RemoteEngine {
    fn run(&mut self, query: &QuerySpec, refine: &[RefineRequest], base: &Path) -> Result<Vec<RankedItem>> {
        let spec = inline_references(query, base)?;
        let mut out: QueryOutcome = self.send(self.client.post(format!("{}/api/query", self.endpoint)).json(&spec))?;
        for r in refine {
            let body = RefineBody { session_id: out.session_id.clone(), request: r.clone() };
            out = self.send(self.client.post(format!("{}/api/refine", self.endpoint)).json(&body))?;
        }
        out.results
            .into_iter()
            .map(|r| {
                Ok(RankedItem { name: self.name_of(&r.object_id)?, segment_id: r.segment_id, object_id: r.object_id })
            })
            .collect()
    }
}
