use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use privscan_core::wire::ErrorBody;
use thiserror::Error;

/// Request failures, each mapped to one HTTP status and a JSON [`ErrorBody`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScanError {
    /// Malformed multipart payload.
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    BadImage(String),
    #[error("{0}")]
    BadUrl(String),
    #[error("{0}")]
    BadSidecar(String),
    #[error("{0}")]
    BadOptions(String),
    #[error("{message}")]
    PolicyFetchFailed { message: String, upstream_status: Option<u16> },
    #[error("{0}")]
    Overloaded(String),
    #[error("{0}")]
    Internal(String),
}

impl ScanError {
    pub fn status(&self) -> StatusCode {
        match self {
            Self::BadRequest(_) | Self::BadImage(_) | Self::BadUrl(_) | Self::BadOptions(_) => StatusCode::BAD_REQUEST,
            Self::BadSidecar(_) => StatusCode::UNPROCESSABLE_ENTITY,
            Self::PolicyFetchFailed { .. } => StatusCode::BAD_GATEWAY,
            Self::Overloaded(_) => StatusCode::TOO_MANY_REQUESTS,
            Self::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::BadRequest(_) => "BadRequest",
            Self::BadImage(_) => "BadImage",
            Self::BadUrl(_) => "BadUrl",
            Self::BadSidecar(_) => "BadSidecar",
            Self::BadOptions(_) => "BadOptions",
            Self::PolicyFetchFailed { .. } => "PolicyFetchFailed",
            Self::Overloaded(_) => "Overloaded",
            Self::Internal(_) => "Internal",
        }
    }

    pub fn body(&self) -> ErrorBody {
        let upstream_status = match self {
            Self::PolicyFetchFailed { upstream_status, .. } => *upstream_status,
            _ => None,
        };
        ErrorBody { error: self.kind().to_string(), message: self.to_string(), upstream_status }
    }
}

impl IntoResponse for ScanError {
    fn into_response(self) -> Response {
        (self.status(), Json(self.body())).into_response()
    }
}
