//! Remote evaluation over newline-delimited JSON.
//!
//! Each request line is answered by exactly one response line with the same
//! `id`. Requests carry weights in their natural ranges, not unit-cube
//! coordinates.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpStream, ToSocketAddrs};

use serde::{Deserialize, Serialize};

use crate::explore::{Class, Classifier, ExploreError, Metric, ParamPoint, Unit, DIM};
use crate::sim::{run_race, Method, RaceConfig, Scenario};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalRequest {
    pub id: u64,
    pub theta: [f64; DIM],
    pub scenario: Scenario,
    pub method: Method,
    pub metric: Metric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalResponse {
    pub id: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<Class>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Runs the requested race on top of `base`.
pub fn evaluate_request(base: &RaceConfig, req: &EvalRequest) -> EvalResponse {
    let config = RaceConfig {
        scenario: req.scenario,
        method: req.method,
        attacker_weights: req.theta.to_vec(),
        ..base.clone()
    };
    match run_race(&config) {
        Ok(record) => EvalResponse {
            id: req.id,
            class: Some(req.metric.classify(&record)),
            error: None,
        },
        Err(e) => EvalResponse {
            id: req.id,
            class: None,
            error: Some(e.to_string()),
        },
    }
}

/// Answers one request line. Unparseable lines get id 0 and an error.
pub fn handle_line(base: &RaceConfig, line: &str) -> EvalResponse {
    match serde_json::from_str::<EvalRequest>(line) {
        Ok(req) => evaluate_request(base, &req),
        Err(e) => EvalResponse {
            id: serde_json::from_str::<serde_json::Value>(line)
                .ok()
                .and_then(|v| v.get("id").and_then(|id| id.as_u64()))
                .unwrap_or(0),
            class: None,
            error: Some(format!("malformed request: {e}")),
        },
    }
}

/// Serves requests from `input` until end of stream.
pub fn serve_lines<R: BufRead, W: Write>(base: &RaceConfig, input: R, mut output: W) -> std::io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let resp = handle_line(base, &line);
        serde_json::to_writer(&mut output, &resp)?;
        output.write_all(b"\n")?;
        output.flush()?;
    }
    Ok(())
}

/// Classifier that forwards every query to a remote evaluator.
pub struct RemoteClassifier<S> {
    reader: BufReader<S>,
    writer: S,
    next_id: u64,
    pub scenario: Scenario,
    pub method: Method,
    pub metric: Metric,
}

impl RemoteClassifier<TcpStream> {
    pub fn connect(
        addr: impl ToSocketAddrs,
        scenario: Scenario,
        method: Method,
        metric: Metric,
    ) -> std::io::Result<Self> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        let writer = stream.try_clone()?;
        Ok(Self {
            reader: BufReader::new(stream),
            writer,
            next_id: 1,
            scenario,
            method,
            metric,
        })
    }
}

impl<S: std::io::Read + Write> RemoteClassifier<S> {
    fn request(&mut self, req: &EvalRequest) -> Result<EvalResponse, ExploreError> {
        let remote = |e: std::io::Error| ExploreError::Remote(e.to_string());
        let mut line = serde_json::to_string(req).expect("serializable request");
        line.push('\n');
        self.writer.write_all(line.as_bytes()).map_err(remote)?;
        self.writer.flush().map_err(remote)?;
        let mut buf = String::new();
        if self.reader.read_line(&mut buf).map_err(remote)? == 0 {
            return Err(ExploreError::Remote("connection closed".into()));
        }
        serde_json::from_str(&buf).map_err(|e| ExploreError::Remote(format!("malformed response: {e}")))
    }
}

impl<S: std::io::Read + Write> Classifier for RemoteClassifier<S> {
    fn classify(&mut self, u: &Unit) -> Result<Class, ExploreError> {
        let req = EvalRequest {
            id: self.next_id,
            theta: ParamPoint::from_unit(u).theta,
            scenario: self.scenario,
            method: self.method,
            metric: self.metric,
        };
        self.next_id += 1;
        let resp = self.request(&req)?;
        if resp.id != req.id {
            return Err(ExploreError::Remote(format!("expected id {}, got {}", req.id, resp.id)));
        }
        match (resp.class, resp.error) {
            (Some(c), _) => Ok(c),
            (None, Some(e)) => Err(ExploreError::Remote(e)),
            (None, None) => Err(ExploreError::Remote("response without class".into())),
        }
    }
}
