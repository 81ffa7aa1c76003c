//! HTTP screening service: POST /screen and GET /healthz.
//!
//! Model parameters and provider handles are immutable shared state; each
//! request runs the synchronous pipeline on the blocking pool. Per-request
//! failures map to structured error bodies and never take the service down.

use std::sync::Arc;

use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use selfscreen_core::embed::EmbeddingProvider;
use selfscreen_core::ffnn::FfnnParams;
use selfscreen_gateway::VlmProvider;

use crate::pipeline::{screen_description, screen_image, Stage, StageError};

pub struct AppState {
    pub params: FfnnParams,
    pub model_version: String,
    pub embedder: Box<dyn EmbeddingProvider + Send + Sync>,
    /// Absent in description-only deployments.
    pub vlm: Option<Box<dyn VlmProvider>>,
}

#[derive(Debug, Deserialize)]
pub struct ScreenRequest {
    #[serde(default)]
    pub image_b64: Option<String>,
    #[serde(default)]
    pub description: Option<String>,
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    code: String,
    stage: Option<String>,
    message: String,
}

struct ServiceError {
    status: StatusCode,
    body: ErrorBody,
}

impl ServiceError {
    fn bad_request(code: &str, message: String) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            body: ErrorBody {
                code: code.to_string(),
                stage: None,
                message,
            },
        }
    }

    fn from_stage(err: StageError) -> Self {
        // Upstream provider trouble is a gateway problem (502); anything
        // inside our own pipeline is a server error (500).
        let status = match err.stage {
            Stage::Describe => StatusCode::BAD_GATEWAY,
            Stage::Embed | Stage::Classify => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self {
            status,
            body: ErrorBody {
                code: "pipeline_error".to_string(),
                stage: Some(err.stage.to_string()),
                message: err.message,
            },
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

async fn healthz(State(state): State<Arc<AppState>>) -> impl IntoResponse {
    Json(serde_json::json!({
        "status": "ok",
        "model_version": state.model_version,
    }))
}

async fn screen(
    State(state): State<Arc<AppState>>,
    body: Result<Json<ScreenRequest>, axum::extract::rejection::JsonRejection>,
) -> Result<Response, ServiceError> {
    let Json(request) = body
        .map_err(|e| ServiceError::bad_request("invalid_body", e.to_string()))?;
    match (&request.image_b64, &request.description) {
        (Some(_), Some(_)) => Err(ServiceError::bad_request(
            "ambiguous_input",
            "supply exactly one of image_b64 or description".into(),
        )),
        (None, None) => Err(ServiceError::bad_request(
            "missing_input",
            "supply image_b64 or description".into(),
        )),
        (Some(image_b64), None) => {
            use base64::Engine;
            let image = base64::engine::general_purpose::STANDARD
                .decode(image_b64)
                .map_err(|e| {
                    ServiceError::bad_request("invalid_base64", e.to_string())
                })?;
            if state.vlm.is_none() {
                return Err(ServiceError::bad_request(
                    "no_vlm_configured",
                    "this deployment accepts description input only".into(),
                ));
            }
            let state = state.clone();
            let response = tokio::task::spawn_blocking(move || {
                screen_image(
                    &state.params,
                    state.vlm.as_deref().expect("checked above"),
                    state.embedder.as_ref(),
                    &image,
                    &state.model_version,
                )
            })
            .await
            .map_err(|e| ServiceError {
                status: StatusCode::INTERNAL_SERVER_ERROR,
                body: ErrorBody {
                    code: "internal".into(),
                    stage: None,
                    message: e.to_string(),
                },
            })?
            .map_err(ServiceError::from_stage)?;
            Ok(Json(response).into_response())
        }
        (None, Some(description)) => {
            let description = description.clone();
            let state = state.clone();
            let response = tokio::task::spawn_blocking(move || {
                screen_description(
                    &state.params,
                    state.embedder.as_ref(),
                    &description,
                    &state.model_version,
                )
            })
            .await
            .map_err(|e| ServiceError {
                status: StatusCode::INTERNAL_SERVER_ERROR,
                body: ErrorBody {
                    code: "internal".into(),
                    stage: None,
                    message: e.to_string(),
                },
            })?
            .map_err(ServiceError::from_stage)?;
            Ok(Json(response).into_response())
        }
    }
}

pub fn build_router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/screen", post(screen))
        .route("/healthz", get(healthz))
        .with_state(state)
}

/// Bind and serve until ctrl-c.
pub fn serve_blocking(state: Arc<AppState>, bind: &str) -> anyhow::Result<()> {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(bind).await?;
        log::info!("listening on {}", listener.local_addr()?);
        let app = build_router(state);
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}
