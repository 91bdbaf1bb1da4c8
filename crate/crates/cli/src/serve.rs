//! Local HTTP service: asynchronous solves, job lookup, rendered results,
//! the scenario schema and the static UI bundle.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use axum::body::Body;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use nfwave_core::domain::{parse_scenario_json, Scenario};
use nfwave_core::solver::Timings;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::net::TcpListener;
use tokio::sync::Semaphore;
use tower_http::services::ServeDir;
use uuid::Uuid;

use crate::heatmap::{render_png, HeatmapOptions, DEFAULT_DB_RANGE};
use crate::report::RxReport;
use crate::run::{solve_scenario, Solved};

pub const SCENARIO_SCHEMA: &str = include_str!("../schema/scenario.schema.json");
pub const DEFAULT_JOB_CAPACITY: usize = 32;

#[derive(Clone, Debug)]
pub struct ServeConfig {
    /// Base directory for relative custom-profile paths.
    pub scenario_root: PathBuf,
    pub static_dir: Option<PathBuf>,
    pub workers: usize,
    pub job_capacity: usize,
}

impl Default for ServeConfig {
    fn default() -> Self {
        Self {
            scenario_root: PathBuf::from("."),
            static_dir: None,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            job_capacity: DEFAULT_JOB_CAPACITY,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
}

struct JobOutput {
    scenario: Scenario,
    solved: Solved,
    field: Vec<u8>,
}

struct Job {
    status: JobStatus,
    submitted: Instant,
    wall_seconds: Option<f64>,
    error: Option<String>,
    output: Option<Arc<JobOutput>>,
    last_used: u64,
}

/// Bounded job table. When full, the least recently used finished job is
/// dropped; queued and running jobs are never evicted.
struct JobStore {
    jobs: HashMap<Uuid, Job>,
    capacity: usize,
    tick: u64,
}

impl JobStore {
    fn touch(&mut self, id: &Uuid) -> Option<&mut Job> {
        self.tick += 1;
        let tick = self.tick;
        self.jobs.get_mut(id).map(|j| {
            j.last_used = tick;
            j
        })
    }

    fn insert(&mut self, id: Uuid) {
        while self.jobs.len() >= self.capacity {
            let victim = self
                .jobs
                .iter()
                .filter(|(_, j)| matches!(j.status, JobStatus::Done | JobStatus::Failed))
                .min_by_key(|(_, j)| j.last_used)
                .map(|(id, _)| *id);
            match victim {
                Some(v) => {
                    self.jobs.remove(&v);
                }
                None => break,
            }
        }
        self.tick += 1;
        self.jobs.insert(
            id,
            Job {
                status: JobStatus::Queued,
                submitted: Instant::now(),
                wall_seconds: None,
                error: None,
                output: None,
                last_used: self.tick,
            },
        );
    }
}

#[derive(Clone)]
pub struct AppState {
    jobs: Arc<Mutex<JobStore>>,
    workers: Arc<Semaphore>,
    config: Arc<ServeConfig>,
}

impl AppState {
    pub fn new(config: ServeConfig) -> Self {
        Self {
            jobs: Arc::new(Mutex::new(JobStore {
                jobs: HashMap::new(),
                capacity: config.job_capacity.max(1),
                tick: 0,
            })),
            workers: Arc::new(Semaphore::new(config.workers.max(1))),
            config: Arc::new(config),
        }
    }

    fn update(&self, id: Uuid, f: impl FnOnce(&mut Job)) {
        if let Some(job) = self.jobs.lock().expect("job table lock").jobs.get_mut(&id) {
            f(job);
        }
    }
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

fn not_found(id: &str) -> Response {
    error(StatusCode::NOT_FOUND, format!("unknown job {id}"))
}

async fn simulate(State(state): State<AppState>, body: String) -> Response {
    let mut scenario = match parse_scenario_json(&body) {
        Ok(s) => s,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.to_string()),
    };
    scenario.resolve_paths(&state.config.scenario_root);
    let id = Uuid::new_v4();
    state.jobs.lock().expect("job table lock").insert(id);

    let worker = state.clone();
    tokio::spawn(async move {
        let Ok(_permit) = worker.workers.clone().acquire_owned().await else {
            return;
        };
        worker.update(id, |j| j.status = JobStatus::Running);
        let result = tokio::task::spawn_blocking(move || {
            solve_scenario(&scenario).map(|solved| {
                let field = solved.dump.to_bytes();
                JobOutput { scenario, solved, field }
            })
        })
        .await;
        worker.update(id, |j| {
            j.wall_seconds = Some(j.submitted.elapsed().as_secs_f64());
            match result {
                Ok(Ok(out)) => {
                    j.output = Some(Arc::new(out));
                    j.status = JobStatus::Done;
                }
                Ok(Err(e)) => {
                    j.error = Some(e.to_string());
                    j.status = JobStatus::Failed;
                }
                Err(e) => {
                    j.error = Some(format!("solver task aborted: {e}"));
                    j.status = JobStatus::Failed;
                }
            }
        });
    });
    (StatusCode::ACCEPTED, Json(json!({ "id": id, "status": JobStatus::Queued }))).into_response()
}

#[derive(Serialize)]
struct GridInfo {
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    x0: f64,
    y0: f64,
}

#[derive(Serialize)]
struct JobView {
    id: Uuid,
    status: JobStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_seconds: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timings: Option<Timings>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<GridInfo>,
}

fn lookup(state: &AppState, id: &str) -> Result<(Uuid, JobStatus, Option<Arc<JobOutput>>), Response> {
    let uuid = Uuid::parse_str(id).map_err(|_| not_found(id))?;
    let mut store = state.jobs.lock().expect("job table lock");
    let job = store.touch(&uuid).ok_or_else(|| not_found(id))?;
    Ok((uuid, job.status, job.output.clone()))
}

fn finished(state: &AppState, id: &str) -> Result<Arc<JobOutput>, Response> {
    let (_, status, output) = lookup(state, id)?;
    output.ok_or_else(|| {
        let s = serde_json::to_value(status).expect("status serializes");
        error(StatusCode::CONFLICT, format!("job {id} is {}", s.as_str().unwrap_or("unfinished")))
    })
}

async fn job_status(State(state): State<AppState>, Path(id): Path<String>) -> Response {
    let uuid = match Uuid::parse_str(&id) {
        Ok(u) => u,
        Err(_) => return not_found(&id),
    };
    let mut store = state.jobs.lock().expect("job table lock");
    let Some(job) = store.touch(&uuid) else {
        return not_found(&id);
    };
    let view = JobView {
        id: uuid,
        status: job.status,
        error: job.error.clone(),
        wall_seconds: job.wall_seconds,
        timings: job.output.as_ref().map(|o| o.solved.report.timings.clone()),
        grid: job.output.as_ref().map(|o| {
            let g = o.solved.report.total.grid();
            GridInfo {
                nx: g.nx,
                ny: g.ny,
                dx: g.dx,
                dy: g.dy,
                x0: g.x0,
                y0: g.y0,
            }
        }),
    };
    Json(view).into_response()
}

async fn job_field(State(state): State<AppState>, Path(id): Path<String>) -> Response {
    match finished(&state, &id) {
        Ok(out) => (
            [(header::CONTENT_TYPE, "application/octet-stream")],
            Body::from(out.field.clone()),
        )
            .into_response(),
        Err(r) => r,
    }
}

#[derive(Deserialize)]
struct HeatmapQuery {
    db_range: Option<f64>,
    overlay: Option<bool>,
}

async fn job_heatmap(State(state): State<AppState>, Path(id): Path<String>, Query(q): Query<HeatmapQuery>) -> Response {
    let db_range = q.db_range.unwrap_or(DEFAULT_DB_RANGE);
    if !(db_range.is_finite() && db_range > 0.0) {
        return error(StatusCode::BAD_REQUEST, format!("db_range must be positive (got {db_range})"));
    }
    let out = match finished(&state, &id) {
        Ok(o) => o,
        Err(r) => return r,
    };
    let opts = HeatmapOptions {
        db_range,
        overlay: q.overlay.unwrap_or(false),
    };
    match tokio::task::spawn_blocking(move || render_png(&out.solved.report.total, Some(&out.scenario), &opts)).await {
        Ok(png) => ([(header::CONTENT_TYPE, "image/png")], Body::from(png)).into_response(),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn job_rx(State(state): State<AppState>, Path(id): Path<String>) -> Response {
    match finished(&state, &id) {
        Ok(out) => {
            let report: &RxReport = &out.solved.rx;
            Json(report).into_response()
        }
        Err(r) => r,
    }
}

async fn schema() -> Response {
    ([(header::CONTENT_TYPE, "application/schema+json")], SCENARIO_SCHEMA).into_response()
}

pub fn router(state: AppState) -> Router {
    let static_dir = state.config.static_dir.clone();
    let api = Router::new()
        .route("/api/simulate", post(simulate))
        .route("/api/jobs/{id}", get(job_status))
        .route("/api/jobs/{id}/field", get(job_field))
        .route("/api/jobs/{id}/heatmap.png", get(job_heatmap))
        .route("/api/jobs/{id}/rx", get(job_rx))
        .route("/api/schema", get(schema))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(|| async { error(StatusCode::NOT_FOUND, "no such resource") }),
    }
}

/// Serve on an already bound listener until `shutdown` resolves.
pub async fn serve_on(
    listener: TcpListener,
    config: ServeConfig,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(AppState::new(config)))
        .with_graceful_shutdown(shutdown)
        .await
}

/// Bind `127.0.0.1:port` and serve in the background; returns the bound
/// address.
pub async fn spawn(port: u16, config: ServeConfig) -> std::io::Result<(SocketAddr, tokio::task::JoinHandle<()>)> {
    let listener = TcpListener::bind(("127.0.0.1", port)).await?;
    let addr = listener.local_addr()?;
    let handle = tokio::spawn(async move {
        let _ = serve_on(listener, config, std::future::pending()).await;
    });
    Ok((addr, handle))
}
