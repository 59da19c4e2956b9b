//! Request and response documents shared by the REST routes, the WebSocket
//! protocol and the remote scenario client.

use std::path::PathBuf;

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use polyseek::retrieval::RefineRequest;
use polyseek::Error;
use serde::{Deserialize, Serialize};

/// Version carried by every WebSocket message the server sends.
pub const PROTOCOL_VERSION: u32 = 1;

/// One WebSocket frame in either direction.
///
/// Client types: `QUERY` (payload: query document), `MLT` (payload:
/// [`MoreLikeThisRequest`]) and `REFINE` (payload: [`RefineBody`]). Each is
/// answered with `QUERY_START`, zero or more `RESULT_BATCH` (queries only, one
/// per completed feature category), then `QUERY_END` carrying the fused
/// outcome; or with a single `ERROR`. Every answer echoes `request_id`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiMessage {
    pub message_type: String,
    #[serde(default)]
    pub request_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol_version: Option<u32>,
    #[serde(default)]
    pub payload: serde_json::Value,
}

impl ApiMessage {
    /// A server message stamped with the protocol version.
    pub fn reply(message_type: &str, request_id: &str, payload: serde_json::Value) -> Self {
        ApiMessage {
            message_type: message_type.to_string(),
            request_id: request_id.to_string(),
            protocol_version: Some(PROTOCOL_VERSION),
            payload,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoreLikeThisRequest {
    pub segment_id: String,
    /// Empty means every queryable category stored for the seed.
    #[serde(default)]
    pub categories: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineBody {
    pub session_id: String,
    #[serde(flatten)]
    pub request: RefineRequest,
}

/// A file uploaded for ingest, stored under `<data_dir>/uploads/<object id>/<name>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UploadedFile {
    pub name: String,
    /// Base64 of the file's bytes.
    pub data: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestRequest {
    /// Files or directories on the server's filesystem.
    #[serde(default)]
    pub paths: Vec<PathBuf>,
    #[serde(default)]
    pub files: Vec<UploadedFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorResponse {
    pub error: ErrorBody,
}

/// An error with its HTTP status and stable machine-readable code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into() }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "INVALID_QUERY", message)
    }

    pub fn too_large(limit: usize) -> Self {
        Self::new(StatusCode::PAYLOAD_TOO_LARGE, "PAYLOAD_TOO_LARGE", format!("reference document exceeds {limit} bytes"))
    }

    pub fn timeout() -> Self {
        Self::new(StatusCode::SERVICE_UNAVAILABLE, "TIMEOUT", "request did not finish within the configured timeout")
    }

    pub fn body(&self) -> ErrorBody {
        ErrorBody { code: self.code.to_string(), message: self.message.clone() }
    }
}

pub fn error_code(e: &Error) -> &'static str {
    match e {
        Error::UnsupportedFormat(_) => "UNSUPPORTED_FORMAT",
        Error::CorruptFile(_) => "CORRUPT_FILE",
        Error::MissingFrame { .. } => "MISSING_FRAME",
        Error::WrongMediaType { .. } => "WRONG_MEDIA_TYPE",
        Error::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
        Error::InsufficientData(_) => "INSUFFICIENT_DATA",
        Error::DegenerateMesh(_) => "DEGENERATE_MESH",
        Error::EmptyImage => "EMPTY_IMAGE",
        Error::DuplicateId(_) => "DUPLICATE_ID",
        Error::IndexStale(_) => "INDEX_STALE",
        Error::UnsupportedMetric(_) => "UNSUPPORTED_METRIC",
        Error::NegativeComponent(_) => "NEGATIVE_COMPONENT",
        Error::UnknownCategory(_) => "UNKNOWN_CATEGORY",
        Error::UnknownSegment(_) => "UNKNOWN_SEGMENT",
        Error::UnknownId(_) => "UNKNOWN_ID",
        Error::MissingVectors { .. } => "MISSING_VECTORS",
        Error::ExtractionFailed(_) => "EXTRACTION_FAILED",
        Error::InvalidQuery(_) => "INVALID_QUERY",
        Error::UnsupportedTerm(_) => "UNSUPPORTED_TERM",
        Error::SessionExpired(_) => "SESSION_EXPIRED",
        Error::InvalidRating(_) => "INVALID_RATING",
        Error::MalformedScript(_) => "MALFORMED_SCRIPT",
        Error::EngineUnreachable(_) => "ENGINE_UNREACHABLE",
        Error::Io(io) if io.kind() == std::io::ErrorKind::NotFound => "NOT_FOUND",
        Error::Io(_) => "IO",
    }
}

fn status_for(e: &Error) -> StatusCode {
    match e {
        Error::UnknownId(_) | Error::UnknownSegment(_) => StatusCode::NOT_FOUND,
        Error::Io(io) if io.kind() == std::io::ErrorKind::NotFound => StatusCode::NOT_FOUND,
        Error::SessionExpired(_) => StatusCode::GONE,
        Error::IndexStale(_) | Error::DuplicateId(_) => StatusCode::CONFLICT,
        Error::Io(_) | Error::EngineUnreachable(_) => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::BAD_REQUEST,
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError { status: status_for(&e), code: error_code(&e), message: e.to_string() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorResponse { error: self.body() };
        (self.status, Json(body)).into_response()
    }
}

/// Decoded size of a base64 string, without decoding it.
pub fn decoded_len(data: &str) -> usize {
    let data = data.trim();
    let padding = data.bytes().rev().take_while(|&b| b == b'=').count();
    (data.len() / 4 * 3 + (data.len() % 4) * 3 / 4).saturating_sub(padding)
}
