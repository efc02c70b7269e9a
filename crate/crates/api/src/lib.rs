//! HTTP/JSON facade over the SLA tracking core.
//!
//! Handlers re-read the store and policy files on every call, under the
//! store's advisory lock, so a running server and `slactl` can share one
//! store. Desk events posted to `/metrics/events` are held in memory only.

mod error;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{HeaderValue, Method, StatusCode, Uri};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::NaiveDate;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;

use slatrack_core::report::{self, SettingsFile};
use slatrack_core::scheduler::{self, Comparison, Job};
use slatrack_core::{
    DeskEvent, DetailedRow, MetricsReport, OverviewRow, Priority, PriorityMatrix, Request,
    RequestFilter, RequestUpdate, SlaPolicy, Status, Store, StoreLock, Timestamp,
};

pub use error::{ApiError, ErrorCode};

pub const DEFAULT_TSF_THRESHOLD_S: f64 = 20.0;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub store_path: PathBuf,
    pub matrix_path: PathBuf,
    pub output_dir: PathBuf,
    /// Default `as_of` for reports; the local date when unset.
    pub as_of: Option<NaiveDate>,
    /// Browser origins allowed to call the API. Empty disables CORS.
    pub allowed_origins: Vec<String>,
}

impl ServerConfig {
    pub fn new(store_path: impl Into<PathBuf>) -> Self {
        ServerConfig {
            store_path: store_path.into(),
            matrix_path: PathBuf::from("sla_matrix.json"),
            output_dir: PathBuf::from("."),
            as_of: None,
            allowed_origins: Vec::new(),
        }
    }
}

struct AppState {
    config: ServerConfig,
    events: Mutex<Vec<DeskEvent>>,
}

type Shared = Arc<AppState>;
type ApiResult<T> = Result<T, ApiError>;

pub fn router(config: ServerConfig) -> ApiResult<Router> {
    let cors = cors_layer(&config.allowed_origins)?;
    let state = Arc::new(AppState {
        config,
        events: Mutex::new(Vec::new()),
    });
    let app = Router::new()
        .route("/requests", post(create_request).get(list_requests))
        .route("/requests/{id}", get(get_request).patch(patch_request))
        .route("/priority-matrix", get(get_matrix).put(put_matrix))
        .route("/reports/detailed", get(detailed_report))
        .route("/reports/overview", get(overview_report))
        .route("/files/prepare", post(prepare_files))
        .route("/metrics/events", post(post_events))
        .route("/metrics/desk", get(desk_metrics))
        .route("/scheduler/simulate", post(simulate))
        .fallback(no_route)
        .method_not_allowed_fallback(wrong_method)
        .with_state(state);
    Ok(match cors {
        Some(layer) => app.layer(layer),
        None => app,
    })
}

fn cors_layer(origins: &[String]) -> ApiResult<Option<CorsLayer>> {
    if origins.is_empty() {
        return Ok(None);
    }
    let origins = origins
        .iter()
        .map(|o| {
            HeaderValue::from_str(o)
                .map_err(|_| ApiError::validation(format!("bad CORS origin '{o}'")))
        })
        .collect::<ApiResult<Vec<_>>>()?;
    Ok(Some(
        CorsLayer::new()
            .allow_origin(origins)
            .allow_methods([Method::GET, Method::POST, Method::PUT, Method::PATCH])
            .allow_headers([axum::http::header::CONTENT_TYPE]),
    ))
}

async fn no_route(uri: Uri) -> ApiError {
    ApiError::not_found(format!("no route for {}", uri.path()))
}

async fn wrong_method(method: Method, uri: Uri) -> ApiError {
    ApiError::new(
        ErrorCode::MethodNotAllowed,
        format!("{method} is not supported on {}", uri.path()),
    )
}

// ---- plumbing --------------------------------------------------------------

async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    F: FnOnce() -> ApiResult<T> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

fn read_store(path: &Path) -> ApiResult<Store> {
    let _lock = StoreLock::shared(path).map_err(ApiError::storage)?;
    Store::open(path).map_err(ApiError::storage)
}

/// Runs `f` on a freshly loaded store under the exclusive lock and saves
/// only if it succeeds, so a rejected call leaves the file untouched.
fn mutate_store<T>(path: &Path, f: impl FnOnce(&mut Store) -> ApiResult<T>) -> ApiResult<T> {
    let lock = StoreLock::exclusive(path).map_err(ApiError::storage)?;
    let mut store = Store::open(path).map_err(ApiError::storage)?;
    let out = f(&mut store)?;
    store.save(&lock).map_err(ApiError::storage)?;
    Ok(out)
}

fn load_policy(path: &Path) -> ApiResult<SlaPolicy> {
    SlaPolicy::load(path).map_err(ApiError::storage)
}

fn parse_body<T: DeserializeOwned>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::validation(format!("invalid body: {e}")))
}

/// Query parameters, consumed one by one so leftovers can be rejected.
struct Params(HashMap<String, String>);

impl Params {
    fn take<T>(&mut self, key: &str) -> ApiResult<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        match self.0.remove(key) {
            None => Ok(None),
            Some(raw) if raw.trim().is_empty() => Ok(None),
            Some(raw) => raw
                .trim()
                .parse()
                .map(Some)
                .map_err(|e| ApiError::validation(format!("bad {key} '{raw}': {e}"))),
        }
    }

    fn as_of(&mut self, state: &AppState) -> ApiResult<NaiveDate> {
        let raw: Option<String> = self.take("as_of")?;
        match raw {
            Some(raw) => NaiveDate::parse_from_str(&raw, "%Y-%m-%d").map_err(|_| {
                ApiError::validation(format!("as_of must be an ISO date (YYYY-MM-DD), got '{raw}'"))
            }),
            None => Ok(state
                .config
                .as_of
                .unwrap_or_else(|| chrono::Local::now().date_naive())),
        }
    }

    fn filter(&mut self) -> ApiResult<RequestFilter> {
        Ok(RequestFilter {
            status: self.take("status")?,
            priority: self.take("priority")?,
            issue_type: self.take("issue_type")?,
        })
    }

    fn finish(self) -> ApiResult<()> {
        if self.0.is_empty() {
            return Ok(());
        }
        let mut keys: Vec<_> = self.0.into_keys().collect();
        keys.sort();
        Err(ApiError::validation("unknown query parameter").with_details(keys))
    }
}

// ---- requests --------------------------------------------------------------

/// POST body: a request without its id, which the server allocates.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NewRequest {
    creation: Timestamp,
    issue_type: String,
    priority: Priority,
    subject: String,
    #[serde(default)]
    status: Option<Status>,
    #[serde(default)]
    completion: Option<Timestamp>,
    #[serde(default)]
    assignee: Option<String>,
}

async fn create_request(
    State(state): State<Shared>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<Request>)> {
    let new: NewRequest = parse_body(&body)?;
    if new.subject.trim().is_empty() {
        return Err(ApiError::validation("subject is empty"));
    }
    let created = blocking(move || {
        mutate_store(&state.config.store_path, |store| {
            let request = Request {
                issue_id: store.allocate_id(),
                creation: new.creation,
                issue_type: new.issue_type.trim().to_string(),
                priority: new.priority,
                subject: new.subject,
                status: new.status.unwrap_or(Status::Open),
                completion: new.completion,
                assignee: new.assignee.filter(|a| !a.trim().is_empty()),
            };
            store.upsert(request.clone())?;
            Ok(request)
        })
    })
    .await?;
    Ok((StatusCode::CREATED, Json(created)))
}

async fn list_requests(
    State(state): State<Shared>,
    Query(query): Query<HashMap<String, String>>,
) -> ApiResult<Json<Vec<Request>>> {
    let mut params = Params(query);
    let filter = params.filter()?;
    params.finish()?;
    let store = blocking(move || read_store(&state.config.store_path)).await?;
    Ok(Json(store.list(&filter).into_iter().cloned().collect()))
}

async fn get_request(
    State(state): State<Shared>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<Json<Request>> {
    let store = blocking(move || read_store(&state.config.store_path)).await?;
    Ok(Json(store.get(&id)?.clone()))
}

async fn patch_request(
    State(state): State<Shared>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> ApiResult<Json<Request>> {
    let update: RequestUpdate = parse_body(&body)?;
    let updated = blocking(move || {
        mutate_store(&state.config.store_path, |store| {
            let next = store.get(&id)?.apply(update)?;
            store.upsert(next.clone())?;
            Ok(next)
        })
    })
    .await?;
    Ok(Json(updated))
}

// ---- priority matrix -------------------------------------------------------

async fn get_matrix(State(state): State<Shared>) -> ApiResult<Json<PriorityMatrix>> {
    let policy = blocking(move || load_policy(&state.config.matrix_path)).await?;
    Ok(Json(policy.matrix))
}

async fn put_matrix(State(state): State<Shared>, body: Bytes) -> ApiResult<Json<PriorityMatrix>> {
    let matrix: PriorityMatrix = parse_body(&body)?;
    let saved = blocking(move || {
        let path = &state.config.matrix_path;
        let mut policy = load_policy(path)?;
        policy.matrix = matrix;
        policy.save(path).map_err(ApiError::storage)?;
        Ok(policy.matrix)
    })
    .await?;
    Ok(Json(saved))
}

// ---- reports and files -----------------------------------------------------

fn detailed_rows(state: &AppState, as_of: NaiveDate, filter: &RequestFilter) -> ApiResult<Vec<DetailedRow>> {
    let store = read_store(&state.config.store_path)?;
    let policy = load_policy(&state.config.matrix_path)?;
    let requests: Vec<Request> = store.list(filter).into_iter().cloned().collect();
    Ok(report::build_detailed(
        &requests,
        &policy.matrix,
        &policy.calendar,
        as_of,
    )?)
}

async fn detailed_report(
    State(state): State<Shared>,
    Query(query): Query<HashMap<String, String>>,
) -> ApiResult<Json<Vec<DetailedRow>>> {
    let mut params = Params(query);
    let as_of = params.as_of(&state)?;
    let filter = params.filter()?;
    params.finish()?;
    let rows = blocking(move || detailed_rows(&state, as_of, &filter)).await?;
    Ok(Json(rows))
}

async fn overview_report(
    State(state): State<Shared>,
    Query(query): Query<HashMap<String, String>>,
) -> ApiResult<Json<Vec<OverviewRow>>> {
    let mut params = Params(query);
    let as_of = params.as_of(&state)?;
    params.finish()?;
    let rows = blocking(move || detailed_rows(&state, as_of, &RequestFilter::default())).await?;
    Ok(Json(report::build_overview(&rows)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreparedFiles {
    pub as_of: NaiveDate,
    /// Overview CSV, detailed CSV, settings file.
    pub files: Vec<PathBuf>,
}

async fn prepare_files(
    State(state): State<Shared>,
    Query(query): Query<HashMap<String, String>>,
) -> ApiResult<Json<PreparedFiles>> {
    let mut params = Params(query);
    let as_of = params.as_of(&state)?;
    params.finish()?;
    let files = blocking(move || {
        let detailed = detailed_rows(&state, as_of, &RequestFilter::default())?;
        let overview = report::build_overview(&detailed);
        let settings = SettingsFile::new(&state.config.output_dir);
        report::emit_files(&overview, &detailed, &settings).map_err(ApiError::storage)
    })
    .await?;
    Ok(Json(PreparedFiles { as_of, files }))
}

// ---- metrics and simulation ------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventsAccepted {
    pub accepted: usize,
    pub total: usize,
}

async fn post_events(State(state): State<Shared>, body: Bytes) -> ApiResult<Json<EventsAccepted>> {
    let events: Vec<DeskEvent> = parse_body(&body)?;
    let problems: Vec<String> = events
        .iter()
        .enumerate()
        .filter_map(|(i, e)| e.validate().err().map(|err| format!("event {i}: {err}")))
        .collect();
    if !problems.is_empty() {
        return Err(ApiError::validation("malformed events").with_details(problems));
    }
    let mut log = state.events.lock().expect("event log poisoned");
    log.extend(events.iter().cloned());
    Ok(Json(EventsAccepted {
        accepted: events.len(),
        total: log.len(),
    }))
}

async fn desk_metrics(
    State(state): State<Shared>,
    Query(query): Query<HashMap<String, String>>,
) -> ApiResult<Json<MetricsReport>> {
    let mut params = Params(query);
    let from: Option<Timestamp> = params.take("from")?;
    let to: Option<Timestamp> = params.take("to")?;
    let threshold = params
        .take::<f64>("tsf_threshold_s")?
        .unwrap_or(DEFAULT_TSF_THRESHOLD_S);
    params.finish()?;
    let events = state.events.lock().expect("event log poisoned").clone();
    let report = match (from, to) {
        (Some(from), Some(to)) => {
            MetricsReport::compute(&events, threshold, Some((from.to_datetime(), to.to_datetime())))?
        }
        (None, None) => MetricsReport::compute(&events, threshold, None)?,
        _ => return Err(ApiError::validation("from and to must be given together")),
    };
    Ok(Json(report))
}

async fn simulate(body: Bytes) -> ApiResult<Json<Comparison>> {
    let jobs: Vec<Job> = parse_body(&body)?;
    Ok(Json(scheduler::compare(&jobs)?))
}
