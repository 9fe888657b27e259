//! Routes and wire payloads.

use std::path::PathBuf;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use shrdlurn::metrics::{self, LevelMetrics};
use shrdlurn::{InteractionRecord, SessionConfig, SessionError, WorldState};
use tower_http::services::ServeDir;

use crate::store::{Entry, Store, StoreError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, error: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                error: error.into(),
                field: None,
            },
        }
    }

    fn field(mut self, field: impl Into<String>) -> Self {
        self.body.field = Some(field.into());
        self
    }

    fn not_found(id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, format!("no session `{id}`"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::NoPending | SessionError::Complete => {
                ApiError::new(StatusCode::CONFLICT, e.to_string())
            }
            SessionError::InvalidIndex { .. } => {
                ApiError::new(StatusCode::BAD_REQUEST, e.to_string()).field("index")
            }
            SessionError::Learn(_) => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
            }
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Config(c) => {
                ApiError::new(StatusCode::BAD_REQUEST, c.to_string()).field(c.field)
            }
            other => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelView {
    pub index: usize,
    pub id: String,
    pub tier: u32,
    pub count: usize,
}

/// What the player sees: the board, the target, and progress.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct View {
    /// `None` once every level is done.
    pub level: Option<LevelView>,
    pub state: WorldState,
    pub goal: Option<WorldState>,
    pub complete: bool,
    pub pending: bool,
    pub interactions: usize,
}

fn view(entry: &Entry) -> View {
    let s = &entry.session;
    View {
        level: s.level().map(|l| LevelView {
            index: s.level_index(),
            id: l.id.clone(),
            tier: l.tier,
            count: s.curriculum().len(),
        }),
        state: s.state().clone(),
        goal: s.level().map(|l| l.goal.clone()),
        complete: s.is_complete(),
        pending: s.pending().is_some(),
        interactions: s.history().len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub created_at: u64,
    pub config: SessionConfig,
    pub view: View,
}

fn session_view(entry: &Entry) -> SessionView {
    SessionView {
        session_id: entry.session.id().to_string(),
        created_at: entry.created_at,
        config: entry.session.config().clone(),
        view: view(entry),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceRequest {
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateView {
    pub index: usize,
    pub state: WorldState,
    /// Canonical text of the best form for this state; for debugging.
    pub best_lf: String,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatesResponse {
    pub utterance: String,
    pub candidates: Vec<CandidateView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRequest {
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsView {
    /// True when no interaction has been labeled yet; the rates are then absent.
    pub empty_history: bool,
    pub examples: usize,
    pub online_accuracy: Option<f64>,
    pub average_scrolls: Option<f64>,
    pub per_level: Vec<LevelMetrics>,
}

fn metrics_view(history: &[InteractionRecord]) -> MetricsView {
    match metrics::summarize(history) {
        Ok(m) => MetricsView {
            empty_history: false,
            examples: m.examples,
            online_accuracy: Some(m.online_accuracy),
            average_scrolls: Some(m.average_scrolls),
            per_level: metrics::per_level(history),
        },
        Err(_) => MetricsView {
            empty_history: true,
            examples: 0,
            online_accuracy: None,
            average_scrolls: None,
            per_level: Vec::new(),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResponse {
    pub record: InteractionRecord,
    pub level_completed: bool,
    pub view: View,
    pub metrics: MetricsView,
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("bad request body: {e}")))
}

/// Applies a JSON object of overrides to the default config, naming the
/// first offending field on failure.
pub fn config_from_overrides(body: &Bytes) -> Result<SessionConfig, ApiError> {
    let overrides: Map<String, Value> = if body.iter().all(u8::is_ascii_whitespace) {
        Map::new()
    } else {
        parse_body(body)?
    };
    let Value::Object(mut merged) =
        serde_json::to_value(SessionConfig::default()).expect("config serializes")
    else {
        unreachable!("config serializes to an object")
    };
    for (key, value) in overrides {
        let bad = |msg: String| ApiError::new(StatusCode::BAD_REQUEST, msg).field(key.clone());
        if !merged.contains_key(&key) {
            return Err(bad(format!("unknown config field `{key}`")));
        }
        merged.insert(key.clone(), value);
        serde_json::from_value::<SessionConfig>(Value::Object(merged.clone()))
            .map_err(|e| bad(format!("invalid config field `{key}`: {e}")))?;
    }
    let config: SessionConfig =
        serde_json::from_value(Value::Object(merged)).expect("checked above");
    config
        .validate()
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()).field(e.field))?;
    Ok(config)
}

/// Runs `f` on the session with exclusive access, off the async threads.
async fn with_entry<T, F>(store: &Store, id: &str, f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce(&mut Entry) -> Result<T, ApiError> + Send + 'static,
{
    let entry = store.get(id).ok_or_else(|| ApiError::not_found(id))?;
    let mut guard = entry.lock_owned().await;
    tokio::task::spawn_blocking(move || f(&mut guard))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
}

async fn create_session(
    State(store): State<Store>,
    body: Bytes,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let config = config_from_overrides(&body)?;
    let store2 = store.clone();
    let entry = tokio::task::spawn_blocking(move || store2.create(config))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let guard = entry.lock().await;
    Ok((StatusCode::CREATED, Json(session_view(&guard))))
}

async fn get_session(
    State(store): State<Store>,
    Path(id): Path<String>,
) -> Result<Json<SessionView>, ApiError> {
    with_entry(&store, &id, |e| Ok(session_view(e)))
        .await
        .map(Json)
}

async fn post_utterance(
    State(store): State<Store>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<CandidatesResponse>, ApiError> {
    let req: UtteranceRequest = parse_body(&body)?;
    with_entry(&store, &id, move |e| {
        let list = e.session.submit_utterance(&req.text)?;
        let candidates = list
            .entries
            .iter()
            .enumerate()
            .map(|(index, c)| CandidateView {
                index,
                state: c.denotation.clone(),
                best_lf: c.best_lf.canonical(),
                prob: c.max_prob,
            })
            .collect();
        // an earlier pending utterance may have just been abandoned
        e.sync_journal()?;
        Ok(CandidatesResponse {
            utterance: req.text,
            candidates,
        })
    })
    .await
    .map(Json)
}

async fn post_selection(
    State(store): State<Store>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<SelectionResponse>, ApiError> {
    let req: SelectionRequest = parse_body(&body)?;
    with_entry(&store, &id, move |e| {
        let sel = e.session.select_candidate(req.index)?;
        e.sync_journal()?;
        Ok(SelectionResponse {
            record: sel.record,
            level_completed: sel.level_completed,
            view: view(e),
            metrics: metrics_view(e.session.history()),
        })
    })
    .await
    .map(Json)
}

async fn get_metrics(
    State(store): State<Store>,
    Path(id): Path<String>,
) -> Result<Json<MetricsView>, ApiError> {
    with_entry(&store, &id, |e| Ok(metrics_view(e.session.history())))
        .await
        .map(Json)
}

async fn get_log(State(store): State<Store>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let text = with_entry(&store, &id, |e| Ok(e.log().to_jsonl())).await?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], text).into_response())
}

/// The HTTP API, optionally serving static files for paths it does not
/// handle.
pub fn router(store: Store, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/utterance", post(post_utterance))
        .route("/sessions/{id}/selection", post(post_selection))
        .route("/sessions/{id}/metrics", get(get_metrics))
        .route("/sessions/{id}/log", get(get_log))
        .with_state(store);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}
