//! HTTP/JSON service over the simulator, explorer and report operations, and
//! the newline-delimited remote-evaluation endpoint.
//!
//! Routes:
//!
//! | method | path           | body               | response                    |
//! |--------|----------------|--------------------|-----------------------------|
//! | GET    | `/health`      |                    | status and version          |
//! | POST   | `/v1/race`     | `RaceConfig`       | `RaceRecord`                |
//! | POST   | `/v1/grid`     | `GridRequest`      | NDJSON stream of `GridLine` |
//! | POST   | `/v1/explore`  | `ExploreRequest`   | `[CellReport]`              |
//! | POST   | `/v1/surface`  | `SurfaceSpec`      | `[SurfacePoint]`            |
//! | POST   | `/v1/selftest` | `SelftestRequest`  | `SelftestReport`            |
//! | POST   | `/v1/evaluate` | `EvalRequest`      | `EvalResponse`              |
//!
//! Failures return an `ErrorBody`: 422 for configuration problems, 500
//! otherwise.

use std::io;
use std::panic::AssertUnwindSafe;
use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use rayon::prelude::*;
use serde::Serialize;
use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::mpsc;

use vecgame_core::api::{parse_json, CellReport, ErrorBody, ErrorKind, ExploreRequest, GridLine, GridRequest, SelftestRequest};
use vecgame_core::explore::selftest::run_selftest;
use vecgame_core::explore::ExploreError;
use vecgame_core::protocol::{evaluate_request, handle_line, EvalRequest};
use vecgame_core::report::{cost_surface, SurfaceSpec, TOOL_VERSION};
use vecgame_core::sim::{run_race, RaceConfig};
use vecgame_core::ConfigError;

#[derive(Clone, Default)]
pub struct AppState {
    /// Base configuration for `/v1/evaluate` requests.
    pub eval_base: Arc<RaceConfig>,
}

#[derive(Debug)]
pub enum ApiError {
    Config(ConfigError),
    Runtime(String),
}

impl From<ConfigError> for ApiError {
    fn from(e: ConfigError) -> Self {
        ApiError::Config(e)
    }
}

impl From<ExploreError> for ApiError {
    fn from(e: ExploreError) -> Self {
        match e {
            ExploreError::Config(c) => ApiError::Config(c),
            other => ApiError::Runtime(other.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match &self {
            ApiError::Config(e) => (StatusCode::UNPROCESSABLE_ENTITY, ErrorBody::from(e)),
            ApiError::Runtime(message) => (
                StatusCode::INTERNAL_SERVER_ERROR,
                ErrorBody {
                    kind: ErrorKind::Runtime,
                    field: None,
                    message: message.clone(),
                },
            ),
        };
        let mut resp = json_response(&body);
        *resp.status_mut() = status;
        resp
    }
}

type ApiResult = Result<Response, ApiError>;

fn json_response<T: Serialize>(value: &T) -> Response {
    match serde_json::to_vec(value) {
        Ok(bytes) => ([(header::CONTENT_TYPE, "application/json")], bytes).into_response(),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::Runtime(format!("worker failed: {e}")))?
}

/// Runs `f` on a pool of `jobs` threads, or the global pool.
fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, ApiError> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| ApiError::Runtime(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/v1/race", post(race))
        .route("/v1/grid", post(grid))
        .route("/v1/explore", post(explore))
        .route("/v1/surface", post(surface))
        .route("/v1/selftest", post(selftest))
        .route("/v1/evaluate", post(evaluate))
        .with_state(state)
}

pub async fn serve_http(listener: TcpListener, state: AppState) -> io::Result<()> {
    axum::serve(listener, router(state)).await
}

async fn health() -> Response {
    json_response(&serde_json::json!({"status": "ok", "version": TOOL_VERSION}))
}

async fn race(body: Bytes) -> ApiResult {
    let config: RaceConfig = parse_json(&body)?;
    config.validate()?;
    let record = blocking(move || run_race(&config).map_err(ApiError::from)).await?;
    Ok(json_response(&record))
}

fn grid_line(index: usize, config: &RaceConfig) -> Vec<u8> {
    let line = match std::panic::catch_unwind(AssertUnwindSafe(|| run_race(config))) {
        Ok(Ok(record)) => GridLine {
            index,
            record: Some(record),
            error: None,
        },
        Ok(Err(e)) => GridLine {
            index,
            record: None,
            error: Some(e.to_string()),
        },
        Err(_) => GridLine {
            index,
            record: None,
            error: Some("race panicked".to_string()),
        },
    };
    let mut bytes = serde_json::to_vec(&line).expect("serializable grid line");
    bytes.push(b'\n');
    bytes
}

async fn grid(body: Bytes) -> ApiResult {
    let request: GridRequest = parse_json(&body)?;
    request.validate()?;
    let configs = request.configs();
    let (tx, rx) = mpsc::channel::<Bytes>(64);
    tokio::task::spawn_blocking(move || {
        let run = || {
            // Chunks keep memory bounded while preserving order.
            let chunk = 4 * rayon::current_num_threads();
            for (c, batch) in configs.chunks(chunk).enumerate() {
                let lines: Vec<Vec<u8>> = batch
                    .par_iter()
                    .enumerate()
                    .map(|(k, config)| grid_line(c * chunk + k, config))
                    .collect();
                for line in lines {
                    if tx.blocking_send(Bytes::from(line)).is_err() {
                        return;
                    }
                }
            }
        };
        if let Err(e) = with_jobs(request.jobs, run) {
            tracing::error!("grid run failed: {e:?}");
        }
    });
    let stream = futures::stream::unfold(rx, |mut rx| async move {
        rx.recv().await.map(|bytes| (Ok::<_, io::Error>(bytes), rx))
    });
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], Body::from_stream(stream)).into_response())
}

async fn explore(body: Bytes) -> ApiResult {
    let request: ExploreRequest = parse_json(&body)?;
    request.validate()?;
    let reports = blocking(move || {
        with_jobs(request.jobs, || {
            request
                .cells
                .par_iter()
                .map(|cell| request.run_cell(cell).map(|report| CellReport { cell: *cell, report }))
                .collect::<Result<Vec<_>, _>>()
        })?
        .map_err(ApiError::from)
    })
    .await?;
    Ok(json_response(&reports))
}

async fn surface(body: Bytes) -> ApiResult {
    let spec: SurfaceSpec = parse_json(&body)?;
    spec.validate()?;
    let points = blocking(move || cost_surface(&spec).map_err(ApiError::from)).await?;
    Ok(json_response(&points))
}

async fn selftest(body: Bytes) -> ApiResult {
    let request: SelftestRequest = parse_json(&body)?;
    request.explore.validate()?;
    let report = blocking(move || run_selftest(request.shape, &request.explore).map_err(ApiError::from)).await?;
    Ok(json_response(&report))
}

async fn evaluate(State(state): State<AppState>, body: Bytes) -> ApiResult {
    let request: EvalRequest = parse_json(&body)?;
    let base = state.eval_base.clone();
    let response = blocking(move || Ok(evaluate_request(&base, &request))).await?;
    Ok(json_response(&response))
}

/// Accepts remote-evaluation connections until the listener fails.
pub async fn serve_eval(listener: TcpListener, base: Arc<RaceConfig>) -> io::Result<()> {
    loop {
        let (socket, peer) = listener.accept().await?;
        let base = base.clone();
        tokio::spawn(async move {
            if let Err(e) = eval_connection(socket, base).await {
                tracing::warn!("evaluation connection {peer} closed: {e}");
            }
        });
    }
}

/// Answers request lines in order until the peer closes the stream.
async fn eval_connection(socket: TcpStream, base: Arc<RaceConfig>) -> io::Result<()> {
    socket.set_nodelay(true)?;
    let (read, mut write) = socket.into_split();
    let mut lines = BufReader::new(read).lines();
    while let Some(line) = lines.next_line().await? {
        if line.trim().is_empty() {
            continue;
        }
        let base = base.clone();
        let response = tokio::task::spawn_blocking(move || handle_line(&base, &line))
            .await
            .map_err(io::Error::other)?;
        let mut out = serde_json::to_vec(&response)?;
        out.push(b'\n');
        write.write_all(&out).await?;
    }
    Ok(())
}
