//! Batch request types shared by the service, its client and the CLI.

use serde::{Deserialize, Serialize};

use crate::explore::selftest::Shape;
use crate::explore::{explore, grid::grid_configs, ExplorationReport, ExploreConfig, ExploreError, GridSpec, Metric, RaceClassifier};
use crate::protocol::RemoteClassifier;
use crate::sim::{Method, RaceConfig, Scenario};
use crate::ConfigError;

fn check_jobs(jobs: Option<usize>) -> Result<(), ConfigError> {
    match jobs {
        Some(0) => Err(ConfigError::new("jobs", "must be at least 1")),
        _ => Ok(()),
    }
}

/// Grid search over every listed method and scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridRequest {
    pub race: RaceConfig,
    pub grid: GridSpec,
    pub methods: Vec<Method>,
    pub scenarios: Vec<Scenario>,
    /// Worker threads; all cores when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
}

impl Default for GridRequest {
    fn default() -> Self {
        Self {
            race: RaceConfig::default(),
            grid: GridSpec::default(),
            methods: Method::ALL.to_vec(),
            scenarios: Scenario::ALL.to_vec(),
            jobs: None,
        }
    }
}

impl GridRequest {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.race.validate()?;
        self.grid.validate()?;
        if self.methods.is_empty() {
            return Err(ConfigError::new("methods", "list at least one method"));
        }
        if self.scenarios.is_empty() {
            return Err(ConfigError::new("scenarios", "list at least one scenario"));
        }
        check_jobs(self.jobs)
    }

    /// Method-major, then scenario, then grid order.
    pub fn configs(&self) -> Vec<RaceConfig> {
        let mut out = Vec::with_capacity(self.methods.len() * self.scenarios.len() * self.grid.len());
        for &method in &self.methods {
            for &scenario in &self.scenarios {
                out.extend(grid_configs(&self.race, scenario, method, &self.grid));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub scenario: Scenario,
    pub metric: Metric,
    pub method: Method,
}

impl CellSpec {
    /// Every scenario, metric and method combination.
    pub fn all() -> Vec<CellSpec> {
        let mut out = Vec::new();
        for scenario in Scenario::ALL {
            for metric in Metric::ALL {
                for method in Method::ALL {
                    out.push(CellSpec { scenario, metric, method });
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExploreRequest {
    pub race: RaceConfig,
    pub explore: ExploreConfig,
    pub cells: Vec<CellSpec>,
    /// `host:port` of a remote evaluator; races run locally when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub remote: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
}

impl Default for ExploreRequest {
    fn default() -> Self {
        Self {
            race: RaceConfig::default(),
            explore: ExploreConfig::default(),
            cells: CellSpec::all(),
            remote: None,
            jobs: None,
        }
    }
}

impl ExploreRequest {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.race.validate()?;
        self.explore.validate()?;
        if self.cells.is_empty() {
            return Err(ConfigError::new("cells", "list at least one cell"));
        }
        check_jobs(self.jobs)
    }

    pub fn run_cell(&self, cell: &CellSpec) -> Result<ExplorationReport, ExploreError> {
        match &self.remote {
            Some(addr) => {
                let mut remote = RemoteClassifier::connect(addr.as_str(), cell.scenario, cell.method, cell.metric)
                    .map_err(|e| ExploreError::Remote(format!("{addr}: {e}")))?;
                explore(&mut remote, &self.explore)
            }
            None => {
                let mut local = RaceClassifier::new(self.race.clone(), cell.scenario, cell.method, cell.metric);
                explore(&mut local, &self.explore)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub cell: CellSpec,
    pub report: ExplorationReport,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelftestRequest {
    pub shape: Shape,
    pub explore: ExploreConfig,
}

impl Default for SelftestRequest {
    fn default() -> Self {
        Self {
            shape: Shape::Sphere,
            explore: ExploreConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Config,
    Runtime,
}

/// Body of every non-success service response.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub kind: ErrorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub message: String,
}

impl From<&ConfigError> for ErrorBody {
    fn from(e: &ConfigError) -> Self {
        Self {
            kind: ErrorKind::Config,
            field: Some(e.field.clone()),
            message: e.message.clone(),
        }
    }
}

/// One line of a streamed grid run; exactly one of `record` and `error` is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridLine {
    /// Zero-based position in [`GridRequest::configs`].
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record: Option<crate::sim::RaceRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Parses a JSON document, naming the offending field on failure.
pub fn parse_json<T: serde::de::DeserializeOwned>(bytes: &[u8]) -> Result<T, ConfigError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." || path == "?" { "(document)".to_string() } else { path };
        ConfigError::new(field, e.into_inner().to_string())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_errors_name_the_field() {
        let e = parse_json::<GridRequest>(br#"{"race": {"physics": {"rounds": "ten"}}}"#).unwrap_err();
        assert_eq!(e.field, "race.physics.rounds");
        let e = parse_json::<RaceConfig>(br#"{"costs": {"colour": 1}}"#).unwrap_err();
        assert!(e.field.starts_with("costs"), "{e}");
        assert!(e.message.contains("colour"));
        let e = parse_json::<RaceConfig>(b"{").unwrap_err();
        assert_eq!(e.field, "(document)");
    }

    #[test]
    fn empty_document_is_all_defaults() {
        assert_eq!(parse_json::<GridRequest>(b"{}").unwrap(), GridRequest::default());
        assert_eq!(GridRequest::default().configs().len(), 1000);
        assert_eq!(ExploreRequest::default().cells.len(), 24);
    }
}
