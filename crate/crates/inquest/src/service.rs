//! HTTP API for live sessions driven by a human or an external client.
//!
//! Session state lives in memory. Per-session work is serialized by a
//! per-session mutex; tree and cluster mutation takes the per-dataset lock
//! (always after the session lock). The public view exposes the size of the
//! current set, never its members or the target.

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use inquest_core::{
    AnswerClassifier, AnswerInterpretation, CallCounters, Catalog, ChatProvider, ClusterStore, Domain,
    EmbeddingProvider, HashedBagOfWords, Mode, OracleGenerator, PossibilitySet, QuestionGenerator, QuestionTree,
    Session, SessionDeps, SessionError, SetRenewer, Status,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::Config;
use crate::dataset::Dataset;
use crate::llm::{constrain_possibilities, open_set_update, LlmClassifier, LlmGenerator, LlmRenewer};
use crate::snapshot;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self { status, body: ErrorBody { code, message: message.into() } }
    }

    fn unprocessable(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, code, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let msg = e.to_string();
        match e {
            SessionError::SessionClosed => ApiError::new(StatusCode::CONFLICT, "session_closed", msg),
            SessionError::NoPendingQuestion => ApiError::new(StatusCode::CONFLICT, "no_pending_question", msg),
            SessionError::UninterpretableAnswer(_) => ApiError::unprocessable("uninterpretable_answer", msg),
            SessionError::InvalidParams(_) => ApiError::unprocessable("invalid_config", msg),
            SessionError::EmptySet => ApiError::unprocessable("empty_set", msg),
            SessionError::Catalog(_) => ApiError::unprocessable("invalid_label", msg),
            SessionError::Provider(_) => ApiError::new(StatusCode::BAD_GATEWAY, "provider_error", msg),
        }
    }
}

fn json_rejection(e: JsonRejection) -> ApiError {
    ApiError::unprocessable("invalid_body", e.body_text())
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    // A panic mid-request leaves plain data behind; keep serving.
    m.lock().unwrap_or_else(|p| p.into_inner())
}

struct DatasetShared {
    tree: QuestionTree,
    catalog: Catalog,
    clusters: ClusterStore,
}

struct DatasetState {
    id: String,
    domain: Domain,
    n_samples: usize,
    counters: Arc<CallCounters>,
    generator: Box<dyn QuestionGenerator>,
    shared: Mutex<DatasetShared>,
}

struct SessionEntry {
    dataset: Arc<DatasetState>,
    mode: Mode,
    session: Session,
    renewer: Option<LlmRenewer>,
}

/// Everything the router needs.
pub struct AppState {
    config: Config,
    chat: Option<Arc<dyn ChatProvider>>,
    embedder: Box<dyn EmbeddingProvider>,
    datasets: BTreeMap<String, Arc<DatasetState>>,
    sessions: Mutex<HashMap<u64, Arc<Mutex<SessionEntry>>>>,
    next_id: AtomicU64,
    snapshot_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(config: Config, chat: Option<Arc<dyn ChatProvider>>) -> Self {
        Self {
            config,
            chat,
            embedder: Box::new(HashedBagOfWords::default()),
            datasets: BTreeMap::new(),
            sessions: Mutex::new(HashMap::new()),
            next_id: AtomicU64::new(1),
            snapshot_dir: None,
        }
    }

    /// Trees are loaded from and saved to `<dir>/<dataset_id>.json`.
    pub fn with_snapshot_dir(mut self, dir: PathBuf) -> Self {
        self.snapshot_dir = Some(dir);
        self
    }

    fn snapshot_path(&self, dataset_id: &str) -> Option<PathBuf> {
        self.snapshot_dir.as_ref().map(|d| d.join(format!("{dataset_id}.json")))
    }

    /// Registers a dataset, restoring its snapshot when one exists.
    pub fn add_dataset(&mut self, dataset: Dataset) -> Result<(), snapshot::SnapshotError> {
        let counters = Arc::new(CallCounters::new());
        let generator: Box<dyn QuestionGenerator> = match &self.chat {
            Some(chat) => Box::new(LlmGenerator::new(chat.clone(), dataset.domain, counters.clone())),
            None => Box::new(
                OracleGenerator::new(counters.clone()).with_attribute_names(dataset.attribute_names.clone()),
            ),
        };
        let mut catalog = dataset.catalog;
        let fresh_clusters = self.config.cluster_store().map_err(|e| snapshot::SnapshotError::CorruptSnapshot(e.to_string()))?;
        let (tree, clusters) = match self.snapshot_path(&dataset.id).filter(|p| p.exists()) {
            Some(path) => snapshot::load(&path, &mut catalog, &self.config.search().reward, fresh_clusters)?,
            None => (QuestionTree::new(dataset.id.clone()), fresh_clusters),
        };
        let state = DatasetState {
            id: dataset.id.clone(),
            domain: dataset.domain,
            n_samples: dataset.samples.len(),
            counters,
            generator,
            shared: Mutex::new(DatasetShared { tree, catalog, clusters }),
        };
        self.datasets.insert(dataset.id, Arc::new(state));
        Ok(())
    }

    fn dataset(&self, id: &str) -> Result<Arc<DatasetState>, ApiError> {
        self.datasets
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "unknown_dataset", format!("no dataset `{id}`")))
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<SessionEntry>>, ApiError> {
        let missing = || ApiError::new(StatusCode::NOT_FOUND, "unknown_session", format!("no session `{id}`"));
        let key: u64 = id.parse().map_err(|_| missing())?;
        lock(&self.sessions).get(&key).cloned().ok_or_else(missing)
    }

    fn save_snapshot(&self, ds: &DatasetState, shared: &DatasetShared) {
        if let Some(path) = self.snapshot_path(&ds.id) {
            // Snapshot failures must not fail the conversation that triggered them.
            let _ = snapshot::save(&path, &shared.tree, &shared.catalog, &shared.clusters);
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub dataset_id: String,
    #[serde(default)]
    pub mode: Option<String>,
    #[serde(default)]
    pub problem_description: Option<String>,
    /// Flat config keys overriding the server defaults.
    #[serde(default)]
    pub config: Option<serde_json::Map<String, Value>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum AnswerValue {
    Keyword(String),
    FreeText { free_text: String },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerRequest {
    pub answer: AnswerValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub turn: u32,
    pub phase: String,
    pub question: String,
    pub answer: String,
}

/// Public session view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub dataset_id: String,
    pub mode: String,
    pub status: String,
    /// Answered exchanges so far.
    pub turn: u32,
    pub phase: Option<String>,
    pub question: Option<String>,
    pub set_size: usize,
    pub history: Vec<HistoryEntry>,
    pub turns: Option<u32>,
    pub feedback_propagated: bool,
}

fn view(id: u64, entry: &SessionEntry, tree: &QuestionTree) -> SessionView {
    let s = &entry.session;
    let pending = s.pending_question();
    let (status, turns) = match s.status() {
        Status::Active => ("active", None),
        Status::Success { turns, .. } => ("success", Some(*turns)),
        Status::Failure => ("failure", None),
    };
    SessionView {
        session_id: id.to_string(),
        dataset_id: entry.dataset.id.clone(),
        mode: entry.mode.as_str().to_string(),
        status: status.to_string(),
        turn: s.transcript().len() as u32,
        phase: pending.map(|(p, _)| p.as_str().to_string()),
        question: pending.map(|(_, q)| q.to_string()),
        set_size: tree.answer(s.node()).set.len(),
        history: s
            .transcript()
            .iter()
            .map(|r| HistoryEntry {
                turn: r.turn,
                phase: r.phase.as_str().to_string(),
                question: r.question.clone(),
                answer: r.answer.clone(),
            })
            .collect(),
        turns,
        feedback_propagated: s.feedback_propagated(),
    }
}

fn merged_config(base: &Config, overrides: Option<&serde_json::Map<String, Value>>) -> Result<Config, ApiError> {
    let Some(over) = overrides else { return Ok(base.clone()) };
    let mut doc = serde_json::to_value(base).expect("config serializes");
    if let Value::Object(map) = &mut doc {
        for (k, v) in over {
            map.insert(k.clone(), v.clone());
        }
    }
    let cfg: Config = serde_json::from_value(doc).map_err(|e| ApiError::unprocessable("invalid_config", e.to_string()))?;
    cfg.validate().map_err(|e| ApiError::unprocessable("invalid_config", e.to_string()))?;
    Ok(cfg)
}

fn create_blocking(state: &AppState, req: CreateSession) -> Result<SessionView, ApiError> {
    let ds = state.dataset(&req.dataset_id)?;
    let mode_name = req.mode.as_deref().unwrap_or("closed");
    let mode = Mode::parse(mode_name).ok_or_else(|| ApiError::unprocessable("invalid_mode", format!("unknown mode `{mode_name}`")))?;
    let cfg = merged_config(&state.config, req.config.as_ref())?;
    let description = req.problem_description.unwrap_or_default();
    if mode != Mode::Closed && state.chat.is_none() {
        return Err(ApiError::unprocessable("invalid_mode", format!("{} mode needs a chat provider", mode.as_str())));
    }
    let embedding = state
        .embedder
        .embed(&description)
        .map_err(|e| ApiError::new(StatusCode::BAD_GATEWAY, "provider_error", e.to_string()))?;

    let mut guard = lock(&ds.shared);
    let shared = &mut *guard;
    let cluster = shared
        .clusters
        .assign(embedding)
        .map_err(|e| ApiError::unprocessable("invalid_embedding", e.to_string()))?;
    let full = shared.catalog.full_set();
    let provider_err = |e: crate::llm::LlmError| match e {
        crate::llm::LlmError::Template(t) => ApiError::unprocessable("invalid_mode", t.to_string()),
        other => ApiError::new(StatusCode::BAD_GATEWAY, "provider_error", other.to_string()),
    };
    let set = match (mode, &state.chat) {
        (Mode::Constrained, Some(chat)) => {
            constrain_possibilities(&description, &full, &shared.catalog, ds.domain, &**chat, &ds.counters)
                .map_err(provider_err)?
        }
        (Mode::Open, Some(chat)) => {
            let labels = open_set_update(&description, &[], &[], cfg.open_set_size, ds.domain, &**chat, &ds.counters)
                .map_err(provider_err)?;
            let mut set = PossibilitySet::new();
            for l in labels {
                set.insert(shared.catalog.intern(&l).map_err(|e| ApiError::unprocessable("invalid_label", e.to_string()))?);
            }
            set
        }
        _ => full,
    };
    let renewer = match (mode, &state.chat) {
        (Mode::Open, Some(chat)) => Some(LlmRenewer {
            provider: chat.clone(),
            domain: ds.domain,
            counters: ds.counters.clone(),
            problem_description: description.clone(),
        }),
        _ => None,
    };
    let mut deps = SessionDeps {
        tree: &mut shared.tree,
        catalog: &mut shared.catalog,
        generator: &*ds.generator,
        classifier: None,
        renewer: renewer.as_ref().map(|r| r as &dyn SetRenewer),
    };
    let (session, _) = Session::start(cfg.session_params(mode, ds.domain), cluster, set, &mut deps)?;
    let id = state.next_id.fetch_add(1, Ordering::Relaxed);
    let entry = SessionEntry { dataset: ds.clone(), mode, session, renewer };
    let v = view(id, &entry, &shared.tree);
    drop(guard);
    lock(&state.sessions).insert(id, Arc::new(Mutex::new(entry)));
    Ok(v)
}

fn answer_blocking(state: &AppState, id: &str, req: AnswerRequest) -> Result<SessionView, ApiError> {
    let handle = state.session(id)?;
    let mut entry_guard = lock(&handle);
    let entry = &mut *entry_guard;
    if *entry.session.status() != Status::Active {
        return Err(SessionError::SessionClosed.into());
    }
    let ds = entry.dataset.clone();
    let mut guard = lock(&ds.shared);
    let shared = &mut *guard;
    let classifier = state.chat.as_ref().map(|chat| LlmClassifier { provider: chat.clone(), counters: ds.counters.clone() });

    let interp = match &req.answer {
        AnswerValue::Keyword(k) => match k.trim().to_ascii_lowercase().as_str() {
            "yes" => Some(AnswerInterpretation::Affirm),
            "no" => Some(AnswerInterpretation::Negate),
            "confirm" => {
                let target = entry.session.pending_target().ok_or_else(|| {
                    ApiError::unprocessable("nothing_to_confirm", "the pending question does not name a target")
                })?;
                Some(AnswerInterpretation::TargetConfirmed(shared.catalog.label(target).to_string()))
            }
            other => {
                return Err(ApiError::unprocessable(
                    "invalid_answer",
                    format!("answer must be yes, no, confirm or {{\"free_text\": ...}}, got `{other}`"),
                ))
            }
        },
        AnswerValue::FreeText { .. } => None,
    };
    let mut deps = SessionDeps {
        tree: &mut shared.tree,
        catalog: &mut shared.catalog,
        generator: &*ds.generator,
        classifier: classifier.as_ref().map(|c| c as &dyn AnswerClassifier),
        renewer: entry.renewer.as_ref().map(|r| r as &dyn SetRenewer),
    };
    let result = match (interp, &req.answer) {
        (Some(i), AnswerValue::Keyword(raw)) => entry.session.apply(i, raw, &mut deps),
        (_, AnswerValue::FreeText { free_text }) => entry.session.answer(free_text, &mut deps),
        (None, AnswerValue::Keyword(_)) => unreachable!("keywords are always interpreted"),
    };
    result?;
    if entry.session.feedback_propagated() {
        state.save_snapshot(&ds, shared);
    }
    Ok(view(id.parse().unwrap_or_default(), entry, &shared.tree))
}

fn get_blocking(state: &AppState, id: &str) -> Result<SessionView, ApiError> {
    let handle = state.session(id)?;
    let entry = lock(&handle);
    let shared = lock(&entry.dataset.shared);
    Ok(view(id.parse().unwrap_or_default(), &entry, &shared.tree))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub dataset_id: String,
    pub domain: String,
    pub n_outcomes: usize,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BonusSummary {
    pub clusters: usize,
    pub entries: usize,
    pub total: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeStats {
    pub dataset_id: String,
    pub roots: usize,
    pub answer_nodes: usize,
    pub question_nodes: usize,
    pub depth_histogram: BTreeMap<String, usize>,
    pub bonus: BonusSummary,
    pub qgc: u64,
}

fn tree_stats(ds: &DatasetState) -> TreeStats {
    let shared = lock(&ds.shared);
    let tree = &shared.tree;
    let mut bonus = BonusSummary { clusters: shared.clusters.len(), entries: 0, total: 0.0, max: 0.0 };
    for q in tree.question_ids() {
        for v in tree.question(q).bonus.values() {
            bonus.entries += 1;
            bonus.total += v;
            bonus.max = bonus.max.max(*v);
        }
    }
    TreeStats {
        dataset_id: ds.id.clone(),
        roots: tree.roots().len(),
        answer_nodes: tree.answer_count(),
        question_nodes: tree.question_count(),
        depth_histogram: tree.depth_histogram().into_iter().map(|(d, n)| (d.to_string(), n)).collect(),
        bonus,
        qgc: ds.counters.qgc(),
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let Json(req) = body.map_err(json_rejection)?;
    let v = blocking(move || create_blocking(&state, req)).await?;
    Ok((StatusCode::CREATED, Json(v)))
}

async fn get_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    blocking(move || get_blocking(&state, &id)).await.map(Json)
}

async fn post_answer(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Json<AnswerRequest>, JsonRejection>,
) -> Result<Json<SessionView>, ApiError> {
    let Json(req) = body.map_err(json_rejection)?;
    blocking(move || answer_blocking(&state, &id, req)).await.map(Json)
}

async fn list_datasets(State(state): State<Arc<AppState>>) -> Json<Vec<DatasetSummary>> {
    Json(
        state
            .datasets
            .values()
            .map(|ds| DatasetSummary {
                dataset_id: ds.id.clone(),
                domain: ds.domain.as_str().to_string(),
                n_outcomes: lock(&ds.shared).catalog.len(),
                n_samples: ds.n_samples,
            })
            .collect(),
    )
}

async fn get_tree_stats(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<TreeStats>, ApiError> {
    let ds = state.dataset(&id)?;
    blocking(move || Ok(tree_stats(&ds))).await.map(Json)
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/v1/sessions", post(create_session))
        .route("/v1/sessions/{id}", get(get_session))
        .route("/v1/sessions/{id}/answer", post(post_answer))
        .route("/v1/datasets", get(list_datasets))
        .route("/v1/datasets/{id}/tree/stats", get(get_tree_stats))
        .with_state(state)
}

pub async fn serve(addr: SocketAddr, state: Arc<AppState>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await
}
