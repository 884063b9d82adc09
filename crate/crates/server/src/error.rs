use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use thiserror::Error;

use crate::session::Status;

/// One offending field of a rejected request. `line` and `column` point
/// into `qubo_csv` when the matrix is at fault.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

impl FieldError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
            line: None,
            column: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("request failed validation")]
    Invalid(Vec<FieldError>),
    #[error("no session `{0}`")]
    UnknownSession(String),
    #[error("session is {0}, not terminal")]
    NotTerminal(Status),
    #[error("unknown artifact kind `{0}`; expected stream_jsonl or wav:<additive|inharmonic|subtractive|arpeggio>")]
    UnknownKind(String),
    #[error("session ended before its first record; nothing to render")]
    NoRecords,
    #[error("rendering failed: {0}")]
    Render(String),
}

impl ApiError {
    pub fn code(&self) -> &'static str {
        match self {
            ApiError::Invalid(_) => "invalid_request",
            ApiError::UnknownSession(_) => "unknown_session",
            ApiError::NotTerminal(_) => "not_terminal",
            ApiError::UnknownKind(_) => "unknown_kind",
            ApiError::NoRecords => "no_records",
            ApiError::Render(_) => "render_failed",
        }
    }

    fn status_code(&self) -> StatusCode {
        match self {
            ApiError::Invalid(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ApiError::NotTerminal(_) | ApiError::NoRecords => StatusCode::CONFLICT,
            ApiError::UnknownKind(_) => StatusCode::BAD_REQUEST,
            ApiError::Render(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'static str,
    message: String,
    #[serde(skip_serializing_if = "<[FieldError]>::is_empty")]
    details: &'a [FieldError],
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let details = match &self {
            ApiError::Invalid(d) => d.as_slice(),
            _ => &[],
        };
        let body = ErrorBody {
            error: self.code(),
            message: self.to_string(),
            details,
        };
        (self.status_code(), Json(body)).into_response()
    }
}
