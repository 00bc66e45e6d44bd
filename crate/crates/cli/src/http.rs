//! HTTP JSON front end of the dialogue service.

use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use multidm::service::{DialogueService, Questionnaire};
use multidm::Error;

#[derive(Debug, Deserialize)]
pub struct TurnRequest {
    pub text: String,
    /// Overrides the service's noise setting for this turn.
    #[serde(default)]
    pub inject_noise: Option<bool>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct QuestionnaireStored {
    pub session_id: String,
    pub questionnaire: Questionnaire,
    pub turns: usize,
}

/// Service error carried to the client as `{"error": "..."}`.
pub struct ApiError(Error);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            Error::UnknownSession(_) => StatusCode::NOT_FOUND,
            Error::SessionFinished(_) | Error::SessionActive(_) | Error::DuplicateQuestionnaire(_) => {
                StatusCode::CONFLICT
            }
            Error::RatingOutOfRange { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(serde_json::json!({ "error": self.0.to_string() }))).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

type Shared = Arc<DialogueService>;

async fn open(State(service): State<Shared>) -> impl IntoResponse {
    Json(service.open())
}

async fn turn(
    State(service): State<Shared>,
    Path(id): Path<String>,
    Json(req): Json<TurnRequest>,
) -> Result<impl IntoResponse, ApiError> {
    let noise = req.inject_noise.unwrap_or(service.config().inject_noise);
    Ok(Json(service.turn_with(&id, &req.text, noise)?))
}

async fn questionnaire(
    State(service): State<Shared>,
    Path(id): Path<String>,
    Json(q): Json<Questionnaire>,
) -> Result<impl IntoResponse, ApiError> {
    let record = service.submit_questionnaire(&id, q)?;
    Ok(Json(QuestionnaireStored {
        session_id: record.session_id,
        questionnaire: record.questionnaire,
        turns: record.transcript.len(),
    }))
}

async fn log(State(service): State<Shared>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(service.log(&id)?))
}

pub fn router(service: Shared) -> Router {
    Router::new()
        .route("/session", post(open))
        .route("/session/{id}/turn", post(turn))
        .route("/session/{id}/questionnaire", post(questionnaire))
        .route("/session/{id}/log", get(log))
        .with_state(service)
}

/// Serves until the process is stopped.
pub async fn serve(service: Shared, port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    eprintln!("dialogue service listening on {}", listener.local_addr()?);
    axum::serve(listener, router(service)).await
}
