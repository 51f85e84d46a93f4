use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use semint_core::Error as CoreError;

/// Error body returned by every endpoint: `{"code": ..., "message": ...}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
}

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("{0} not found")]
    NotFound(String),

    #[error("{0}")]
    BadRequest(String),

    #[error("{0}")]
    Conflict(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("background task failed: {0}")]
    Internal(String),
}

impl ApiError {
    fn status_and_code(&self) -> (StatusCode, &'static str) {
        match self {
            ApiError::NotFound(_) => (StatusCode::NOT_FOUND, "not_found"),
            ApiError::BadRequest(_) => (StatusCode::BAD_REQUEST, "bad_request"),
            ApiError::Conflict(_) => (StatusCode::CONFLICT, "conflict"),
            ApiError::Internal(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
            ApiError::Core(e) => match e {
                CoreError::Busy => (StatusCode::CONFLICT, "busy"),
                CoreError::NothingQueued => (StatusCode::CONFLICT, "nothing_queued"),
                CoreError::UnknownIteration { .. } => (StatusCode::NOT_FOUND, "unknown_iteration"),
                CoreError::InvalidBatch(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_batch"),
                CoreError::InvalidConfig(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_config"),
                CoreError::InvalidCorpus(_)
                | CoreError::InvalidRow { .. }
                | CoreError::EmptyVocabulary
                | CoreError::RankTooLow { .. }
                | CoreError::Shape(_)
                | CoreError::SingularNormalMatrix => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_input"),
                CoreError::Json(_) | CoreError::Csv(_) => (StatusCode::BAD_REQUEST, "malformed"),
                CoreError::SnapshotVersion { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "snapshot_version"),
                CoreError::Io(e) if e.kind() == std::io::ErrorKind::NotFound => {
                    (StatusCode::NOT_FOUND, "not_found")
                }
                CoreError::Io(_) => (StatusCode::INTERNAL_SERVER_ERROR, "io"),
                CoreError::UpdateFailed(_) => (StatusCode::INTERNAL_SERVER_ERROR, "update_failed"),
            },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code) = self.status_and_code();
        (status, Json(ErrorBody { code, message: self.to_string() })).into_response()
    }
}
