//! Mapping of engine errors to HTTP responses and process exit codes.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use erbench_core::{Error, ErrorKind};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Body of every error response.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    pub detail: Value,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

pub fn status_of(kind: ErrorKind) -> StatusCode {
    match kind {
        ErrorKind::Validation => StatusCode::BAD_REQUEST,
        ErrorKind::NotFound => StatusCode::NOT_FOUND,
        ErrorKind::Conflict => StatusCode::CONFLICT,
        ErrorKind::Semantic => StatusCode::UNPROCESSABLE_ENTITY,
        ErrorKind::Internal => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

/// Exit status of the command line for each error kind.
pub fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Internal => 1,
        ErrorKind::Validation => 2,
        ErrorKind::NotFound => 3,
        ErrorKind::Conflict => 4,
        ErrorKind::Semantic => 5,
    }
}

fn detail(e: &Error) -> Value {
    match e {
        Error::NotFound { kind, id } => json!({ "resource": kind, "id": id }),
        Error::RowArity { row, expected, found } => json!({ "row": row, "expected": expected, "found": found }),
        Error::UniverseMismatch { left, right } => json!({ "left": left, "right": right }),
        Error::InvalidSampleCount(s) => json!({ "samples": s }),
        Error::TooManySources(n) | Error::FewerThanThreeExperiments(n) => json!({ "count": n }),
        _ => json!({ "kind": format!("{:?}", e.kind()).to_lowercase() }),
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError {
            status: status_of(e.kind()),
            body: ErrorBody {
                code: e.code().to_owned(),
                message: e.to_string(),
                detail: detail(&e),
            },
        }
    }
}

impl ApiError {
    pub fn bad_request(code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            body: ErrorBody {
                code: code.to_owned(),
                message: message.into(),
                detail: Value::Null,
            },
        }
    }

    pub fn route_not_found(path: &str) -> Self {
        ApiError {
            status: StatusCode::NOT_FOUND,
            body: ErrorBody {
                code: "RouteNotFound".into(),
                message: format!("no route for `{path}`"),
                detail: Value::Null,
            },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}
