use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};

#[derive(Debug)]
pub enum ServiceError {
    BadRequest(String),
    NotFound(String),
    Internal(String),
}

impl std::fmt::Display for ServiceError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ServiceError::BadRequest(m) | ServiceError::NotFound(m) | ServiceError::Internal(m) => {
                f.write_str(m)
            }
        }
    }
}

impl std::error::Error for ServiceError {}

impl From<rerf_core::Error> for ServiceError {
    fn from(e: rerf_core::Error) -> Self {
        match e {
            rerf_core::Error::OutOfRange { .. } => ServiceError::NotFound(e.to_string()),
            rerf_core::Error::InvalidArgument(_) => ServiceError::BadRequest(e.to_string()),
            other => ServiceError::Internal(other.to_string()),
        }
    }
}

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        if self.status().is_server_error() {
            tracing::error!("{self}");
        }
        (self.status(), self.to_string()).into_response()
    }
}
