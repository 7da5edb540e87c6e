//! Async client for the vecgame HTTP service.

use futures::StreamExt;
use reqwest::StatusCode;
use serde::de::DeserializeOwned;
use serde::Serialize;

use vecgame_core::api::{CellReport, ErrorBody, ErrorKind, ExploreRequest, GridLine, GridRequest, SelftestRequest};
use vecgame_core::explore::selftest::SelftestReport;
use vecgame_core::protocol::{EvalRequest, EvalResponse};
use vecgame_core::report::{SurfacePoint, SurfaceSpec};
use vecgame_core::sim::{RaceConfig, RaceRecord};
use vecgame_core::ConfigError;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    /// The service rejected the request's configuration.
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("service error ({status}): {message}")]
    Service { status: u16, message: String },
    #[error("transport error: {0}")]
    Transport(#[from] reqwest::Error),
    #[error("malformed response: {0}")]
    Decode(#[from] serde_json::Error),
}

#[derive(Clone, Debug)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` is the service root, such as `http://127.0.0.1:8080`.
    pub fn new(base: impl Into<String>) -> Self {
        Self {
            base: base.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    async fn post(&self, path: &str, body: &impl Serialize) -> Result<reqwest::Response, ClientError> {
        let bytes = serde_json::to_vec(body)?;
        let resp = self
            .http
            .post(format!("{}{path}", self.base))
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .body(bytes)
            .send()
            .await?;
        check(resp).await
    }

    async fn post_json<T: DeserializeOwned>(&self, path: &str, body: &impl Serialize) -> Result<T, ClientError> {
        let bytes = self.post(path, body).await?.bytes().await?;
        Ok(serde_json::from_slice(&bytes)?)
    }

    pub async fn health(&self) -> Result<serde_json::Value, ClientError> {
        let resp = check(self.http.get(format!("{}/health", self.base)).send().await?).await?;
        Ok(serde_json::from_slice(&resp.bytes().await?)?)
    }

    pub async fn race(&self, config: &RaceConfig) -> Result<RaceRecord, ClientError> {
        self.post_json("/v1/race", config).await
    }

    /// Streams grid lines to `sink` in request order.
    pub async fn grid_each(&self, request: &GridRequest, mut sink: impl FnMut(GridLine)) -> Result<(), ClientError> {
        let mut stream = self.post("/v1/grid", request).await?.bytes_stream();
        let mut buf: Vec<u8> = Vec::new();
        while let Some(chunk) = stream.next().await {
            buf.extend_from_slice(&chunk?);
            let mut start = 0;
            while let Some(end) = buf[start..].iter().position(|&b| b == b'\n') {
                sink(serde_json::from_slice(&buf[start..start + end])?);
                start += end + 1;
            }
            buf.drain(..start);
        }
        if buf.iter().any(|b| !b.is_ascii_whitespace()) {
            sink(serde_json::from_slice(&buf)?);
        }
        Ok(())
    }

    pub async fn grid(&self, request: &GridRequest) -> Result<Vec<GridLine>, ClientError> {
        let mut out = Vec::new();
        self.grid_each(request, |line| out.push(line)).await?;
        Ok(out)
    }

    pub async fn explore(&self, request: &ExploreRequest) -> Result<Vec<CellReport>, ClientError> {
        self.post_json("/v1/explore", request).await
    }

    pub async fn surface(&self, spec: &SurfaceSpec) -> Result<Vec<SurfacePoint>, ClientError> {
        self.post_json("/v1/surface", spec).await
    }

    pub async fn selftest(&self, request: &SelftestRequest) -> Result<SelftestReport, ClientError> {
        self.post_json("/v1/selftest", request).await
    }

    pub async fn evaluate(&self, request: &EvalRequest) -> Result<EvalResponse, ClientError> {
        self.post_json("/v1/evaluate", request).await
    }
}

async fn check(resp: reqwest::Response) -> Result<reqwest::Response, ClientError> {
    let status = resp.status();
    if status.is_success() {
        return Ok(resp);
    }
    let bytes = resp.bytes().await?;
    match serde_json::from_slice::<ErrorBody>(&bytes) {
        Ok(body) if body.kind == ErrorKind::Config && status == StatusCode::UNPROCESSABLE_ENTITY => Err(ConfigError::new(
            body.field.unwrap_or_else(|| "(document)".to_string()),
            body.message,
        )
        .into()),
        Ok(body) => Err(ClientError::Service {
            status: status.as_u16(),
            message: body.message,
        }),
        Err(_) => Err(ClientError::Service {
            status: status.as_u16(),
            message: String::from_utf8_lossy(&bytes).into_owned(),
        }),
    }
}
