//! HTTP transport for human-answered elicitation sessions.
//!
//! Routes:
//! - `POST   /sessions`              create, returns `{id}`
//! - `GET    /sessions/{id}/query`   pending pair or `{done: true}`
//! - `POST   /sessions/{id}/answer`  `{prefer: "a" | "b"}`
//! - `GET    /sessions/{id}/result`  outcome, 409 until done
//! - `DELETE /sessions/{id}`         close and forget

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use metric_elicit_core::elicit::{ElicitationConfig, Family, DEFAULT_DELTA, DEFAULT_K};
use metric_elicit_core::empirical::{load_csv, train_logistic, EmpiricalModel};
use metric_elicit_core::model::{PopulationModel, QuadratureModel, SyntheticLogistic};
use metric_elicit_core::oracle::Probe;
use metric_elicit_core::session::ElicitationSession;
use metric_elicit_core::{Error, Orientation};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use serde_json::json;

/// Population model a session is run against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Logistic {
        a: f64,
    },
    Quadrature {
        a: f64,
    },
    Csv {
        path: PathBuf,
        #[serde(default = "default_label")]
        label_col: String,
        #[serde(default = "default_lambda")]
        lambda: f64,
        #[serde(default = "default_split")]
        split: f64,
        #[serde(default)]
        seed: u64,
    },
}

fn default_label() -> String {
    "label".into()
}

fn default_lambda() -> f64 {
    1.0
}

fn default_split() -> f64 {
    0.5
}

impl ModelSpec {
    pub fn build(&self) -> metric_elicit_core::Result<Arc<dyn PopulationModel>> {
        Ok(match self {
            ModelSpec::Logistic { a } => Arc::new(SyntheticLogistic::new(*a)?),
            ModelSpec::Quadrature { a } => Arc::new(QuadratureModel::logistic(*a)?),
            ModelSpec::Csv {
                path,
                label_col,
                lambda,
                split,
                seed,
            } => {
                let data = load_csv(path, label_col)?;
                let (_, held) = train_logistic(&data, *lambda, *split, *seed)?;
                Arc::new(EmpiricalModel::new(&held))
            }
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub family: Family,
    pub model: ModelSpec,
    pub epsilon: f64,
    pub k: Option<usize>,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Choice {
    A,
    B,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct Answer {
    prefer: Choice,
    query_index: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Card {
    pub tp: f64,
    pub tn: f64,
    pub fp: f64,
    #[serde(rename = "fn")]
    pub fn_mass: f64,
    pub threshold: Option<f64>,
    pub orientation: Option<Orientation>,
    pub theta: Option<f64>,
}

impl Card {
    fn new(probe: &Probe, zeta: f64) -> Self {
        Self {
            tp: probe.point.tp,
            tn: probe.point.tn,
            fp: probe.point.fp(zeta),
            fn_mass: probe.point.fn_mass(zeta),
            threshold: probe.classifier.map(|c| c.delta),
            orientation: probe.classifier.map(|c| c.orientation),
            theta: probe.theta,
        }
    }
}

struct Entry {
    session: ElicitationSession,
    zeta: f64,
}

type Sessions = Arc<RwLock<HashMap<String, Arc<Mutex<Entry>>>>>;

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Sessions,
}

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::NoPendingQuery | Error::DuplicateAnswer { .. } | Error::SessionClosed => {
                StatusCode::CONFLICT
            }
            Error::InvalidParameter(_)
            | Error::Io { .. }
            | Error::Csv(_)
            | Error::ParseError { .. }
            | Error::NonBinaryLabel { .. }
            | Error::MissingLabelColumn(_)
            | Error::DegenerateSplit(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

fn bad_request(e: impl std::fmt::Display) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, e.to_string())
}

fn parse<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(bad_request)
}

impl AppState {
    fn entry(&self, id: &str) -> Result<Arc<Mutex<Entry>>, ApiError> {
        self.sessions
            .read()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("unknown session {id}")))
    }
}

fn new_id() -> String {
    let mut bytes = [0u8; 16];
    rand::rng().fill_bytes(&mut bytes);
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

async fn create(State(state): State<AppState>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let req: CreateSession = parse(&body)?;
    let config = ElicitationConfig {
        family: req.family,
        epsilon: req.epsilon,
        k: req.k.unwrap_or(DEFAULT_K),
        delta: req.delta.unwrap_or(DEFAULT_DELTA),
    };
    let entry = tokio::task::spawn_blocking(move || -> Result<Entry, Error> {
        let model = req.model.build()?;
        let zeta = model.zeta();
        Ok(Entry {
            session: ElicitationSession::new(model, config)?,
            zeta,
        })
    })
    .await
    .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let id = new_id();
    state
        .sessions
        .write()
        .expect("session map poisoned")
        .insert(id.clone(), Arc::new(Mutex::new(entry)));
    Ok((StatusCode::CREATED, Json(json!({ "id": id }))))
}

async fn query(State(state): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    let entry = state.entry(&id)?;
    let entry = entry.lock().expect("session poisoned");
    Ok(Json(match entry.session.pending_query()? {
        None => json!({ "done": true }),
        Some(q) => json!({
            "query_index": q.index,
            "zeta": entry.zeta,
            "a": Card::new(&q.first, entry.zeta),
            "b": Card::new(&q.second, entry.zeta),
        }),
    }))
}

async fn answer(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<impl IntoResponse, ApiError> {
    let entry = state.entry(&id)?;
    let answer: Answer = parse(&body)?;
    // The last answer triggers the grid search, so keep it off the reactor.
    tokio::task::spawn_blocking(move || {
        let mut entry = entry.lock().expect("session poisoned");
        let prefer_first = matches!(answer.prefer, Choice::A);
        entry.session.submit_answer(prefer_first, answer.query_index)
    })
    .await
    .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(Json(json!({ "accepted": true })))
}

async fn result(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let entry = state.entry(&id)?;
    let entry = entry.lock().expect("session poisoned");
    match entry.session.outcome()? {
        Some(outcome) => Ok(Json(outcome).into_response()),
        None => Err(ApiError(StatusCode::CONFLICT, "elicitation is not finished".into())),
    }
}

async fn close(State(state): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    let removed = state
        .sessions
        .write()
        .expect("session map poisoned")
        .remove(&id)
        .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("unknown session {id}")))?;
    removed.lock().expect("session poisoned").session.close();
    Ok(Json(json!({ "closed": true })))
}

pub fn router() -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", axum::routing::delete(close))
        .route("/sessions/{id}/query", get(query))
        .route("/sessions/{id}/answer", post(answer))
        .route("/sessions/{id}/result", get(result))
        .with_state(AppState::default())
}

/// Binds `addr` and serves until the process ends.
pub async fn serve(addr: SocketAddr) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router()).await?;
    Ok(())
}
