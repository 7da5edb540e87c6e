//! Run manifests, summary tables, cost surfaces and exploration outputs.

use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::explore::{ExplorationReport, Metric};
use crate::features::fmt_f64;
use crate::game::{scalarize, WeightVector};
use crate::sim::cost::{point_costs, CostParams, OBJECTIVES};
use crate::sim::{Method, RaceRecord, Scenario, Track};
use crate::ConfigError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hex SHA-256 of the canonical JSON encoding of `inputs`.
pub fn config_hash<T: Serialize>(inputs: &T) -> String {
    let bytes = serde_json::to_vec(inputs).expect("serializable inputs");
    hex::encode(Sha256::digest(&bytes))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    /// Effective configuration after command-line overrides.
    pub inputs: serde_json::Value,
    pub seed: u64,
    pub tool_version: String,
    pub outputs: Vec<String>,
    /// Milliseconds since the Unix epoch.
    pub started_at_ms: u64,
    pub finished_at_ms: u64,
    /// When per-round vehicle states are sampled.
    pub state_convention: String,
}

impl RunManifest {
    pub fn new<T: Serialize>(command: &str, inputs: &T, seed: u64) -> Self {
        let now = now_ms();
        Self {
            command: command.to_string(),
            config_hash: config_hash(inputs),
            inputs: serde_json::to_value(inputs).expect("serializable inputs"),
            seed,
            tool_version: TOOL_VERSION.to_string(),
            outputs: Vec::new(),
            started_at_ms: now,
            finished_at_ms: now,
            state_convention: "pre_decision".to_string(),
        }
    }

    pub fn finish(&mut self) {
        self.finished_at_ms = now_ms();
    }
}

pub fn now_ms() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub races: usize,
    pub passes: usize,
    pub out_of_bounds: usize,
    pub collisions: usize,
    pub average_min_distance: f64,
    /// Progress, bounds and proximity.
    pub average_costs: [f64; OBJECTIVES],
    pub lead_percent: f64,
    /// Rounds decided by an adjusted game, over all rounds.
    pub adjusted_round_rate: f64,
}

impl MethodSummary {
    pub fn from_records(method: Method, records: &[&RaceRecord]) -> Self {
        let n = records.len();
        let mean = |f: &dyn Fn(&RaceRecord) -> f64| {
            if n == 0 {
                0.0
            } else {
                records.iter().map(|r| f(r)).sum::<f64>() / n as f64
            }
        };
        let rounds: usize = records.iter().map(|r| r.rounds.len()).sum();
        let adjusted: usize = records.iter().map(|r| r.adjusted_rounds).sum();
        Self {
            method,
            races: n,
            passes: records.iter().filter(|r| r.passed).count(),
            out_of_bounds: records.iter().filter(|r| r.out_of_bounds).count(),
            collisions: records.iter().filter(|r| r.collided).count(),
            average_min_distance: mean(&|r| r.min_distance),
            average_costs: std::array::from_fn(|h| mean(&|r| r.accumulated_costs[h])),
            lead_percent: 100.0 * mean(&|r| r.lead_fraction),
            adjusted_round_rate: if rounds == 0 { 0.0 } else { adjusted as f64 / rounds as f64 },
        }
    }

    pub fn complexity(&self) -> &'static str {
        match self.method {
            Method::Scalar => "O(nmg)",
            Method::Vector => "O(n^2m+nmg)",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub columns: Vec<MethodSummary>,
}

impl SummaryTable {
    /// One column per method present, scalar first.
    pub fn from_records(records: &[RaceRecord]) -> Self {
        let columns = Method::ALL
            .into_iter()
            .filter_map(|m| {
                let subset: Vec<&RaceRecord> = records.iter().filter(|r| r.config.method == m).collect();
                (!subset.is_empty()).then(|| MethodSummary::from_records(m, &subset))
            })
            .collect();
        Self { columns }
    }

    pub fn column(&self, method: Method) -> Option<&MethodSummary> {
        self.columns.iter().find(|c| c.method == method)
    }

    /// Metric rows as (label, one cell per column).
    pub fn rows(&self) -> Vec<(&'static str, Vec<String>)> {
        let cells = |f: &dyn Fn(&MethodSummary) -> String| self.columns.iter().map(f).collect::<Vec<_>>();
        vec![
            ("Passes", cells(&|c| c.passes.to_string())),
            ("Out of Bounds", cells(&|c| c.out_of_bounds.to_string())),
            ("Collisions", cells(&|c| c.collisions.to_string())),
            ("Average Minimum Distance (m)", cells(&|c| format!("{:.1}", c.average_min_distance))),
            ("Average Progress Cost", cells(&|c| format!("{:.2}", c.average_costs[0]))),
            ("Average Bounds Cost", cells(&|c| format!("{:.2}", c.average_costs[1]))),
            ("Average Proximity Cost", cells(&|c| format!("{:.2}", c.average_costs[2]))),
            ("Proportion in Lead (%)", cells(&|c| format!("{:.2}", c.lead_percent))),
            ("Time Complexity", cells(&|c| c.complexity().to_string())),
        ]
    }

    pub fn render_text(&self) -> String {
        let rows = self.rows();
        let label_width = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0).max("Algorithm".len());
        let width = 14;
        let mut out = format!("{:<label_width$}", "Algorithm");
        for c in &self.columns {
            let name = match c.method {
                Method::Scalar => "Scalar",
                Method::Vector => "Vector",
            };
            out.push_str(&format!("  {name:>width$}"));
        }
        out.push('\n');
        for (label, cells) in rows {
            out.push_str(&format!("{label:<label_width$}"));
            for cell in cells {
                out.push_str(&format!("  {cell:>width$}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let mut header = vec!["metric".to_string()];
        header.extend(self.columns.iter().map(|c| c.method.name().to_string()));
        w.write_record(&header)?;
        for (label, cells) in self.rows() {
            let mut row = vec![label.to_string()];
            row.extend(cells);
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// What to plot and where the opponent sits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurfaceSpec {
    pub costs: CostParams,
    pub track: Track,
    pub weights: Vec<f64>,
    /// Opponent track angle (rad) and outward lateral offset (m).
    pub opponent_angle: f64,
    pub opponent_lateral: f64,
    /// Grid points per axis over the square enclosing the track.
    pub nx: usize,
    pub ny: usize,
}

impl Default for SurfaceSpec {
    fn default() -> Self {
        Self {
            costs: CostParams::default(),
            track: Track::default(),
            weights: vec![1.0, 1.0, 1.0],
            opponent_angle: 0.0,
            opponent_lateral: 0.0,
            nx: 161,
            ny: 161,
        }
    }
}

impl SurfaceSpec {
    pub fn validate(&self) -> Result<WeightVector, ConfigError> {
        if self.weights.len() != OBJECTIVES {
            return Err(ConfigError::new("weights", format!("expected {OBJECTIVES} weights")));
        }
        if self.nx == 0 || self.ny == 0 {
            return Err(ConfigError::new("nx", "grid needs at least one point per axis"));
        }
        self.costs.validate()?;
        WeightVector::new(self.weights.clone()).map_err(|e| ConfigError::new("weights", e.to_string()))
    }

    pub fn opponent(&self) -> [f64; 2] {
        let r = self.track.centerline_radius() + self.opponent_lateral;
        [
            self.track.center[0] + r * self.opponent_angle.cos(),
            self.track.center[1] + r * self.opponent_angle.sin(),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub x: f64,
    pub y: f64,
    pub cost: f64,
}

/// Weighted point cost over a grid spanning the track's bounding square; a
/// 1x1 grid samples the track centre.
pub fn cost_surface(spec: &SurfaceSpec) -> Result<Vec<SurfacePoint>, ConfigError> {
    let weights = spec.validate()?;
    let track = &spec.track;
    let opponent = spec.opponent();
    let opponent_angle = track.angle_of(opponent);
    let half = track.r_outer * 1.1;
    let axis = |k: usize, n: usize, c: f64| {
        if n == 1 {
            c
        } else {
            c - half + 2.0 * half * k as f64 / (n - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(spec.nx * spec.ny);
    for j in 0..spec.ny {
        for i in 0..spec.nx {
            let p = [axis(i, spec.nx, track.center[0]), axis(j, spec.ny, track.center[1])];
            let c = point_costs(p, track.angle_of(p), opponent_angle, opponent, track, &spec.costs);
            let cost = weights.as_slice().iter().zip(c).map(|(w, v)| w * v).sum();
            out.push(SurfacePoint { x: p[0], y: p[1], cost });
        }
    }
    Ok(out)
}

pub fn write_surface_csv<W: Write>(points: &[SurfacePoint], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["x", "y", "cost"])?;
    for p in points {
        w.write_record([fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.cost)])?;
    }
    w.flush()?;
    Ok(())
}

/// Boundary samples as rows of (sample, theta triplet, class, normal).
pub fn write_boundary_csv<W: Write>(report: &ExplorationReport, out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["sample", "theta1", "theta2", "theta3", "class", "normal1", "normal2", "normal3"])?;
    for (k, b) in report.boundary.iter().enumerate() {
        for (p, class) in [(&b.inside, "success"), (&b.outside, "failure")] {
            let mut row = vec![(k + 1).to_string()];
            row.extend(p.theta.iter().map(|&t| fmt_f64(t)));
            row.push(class.to_string());
            row.extend(b.normal.iter().map(|&n| fmt_f64(n)));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One cell of the success-volume table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeCell {
    pub scenario: Scenario,
    pub metric: Metric,
    pub method: Method,
    pub volume: f64,
    pub samples_used: usize,
}

impl VolumeCell {
    pub fn new(scenario: Scenario, metric: Metric, method: Method, report: &ExplorationReport) -> Self {
        Self {
            scenario,
            metric,
            method,
            volume: report.volume_estimate,
            samples_used: report.samples_used,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} | {} | {} | {:.3}",
            self.scenario.title(),
            self.metric.name(),
            self.method.name(),
            self.volume
        )
    }
}

/// Scenario-by-metric table with a scalar and a vector column.
pub fn render_volume_table(cells: &[VolumeCell]) -> String {
    let mut out = format!("{:<14}{:<12}{:>8}{:>8}\n", "Scenario", "Metric", "Scalar", "Vector");
    for scenario in Scenario::ALL {
        for metric in Metric::ALL {
            let find = |m: Method| {
                cells
                    .iter()
                    .find(|c| c.scenario == scenario && c.metric == metric && c.method == m)
                    .map(|c| format!("{:.3}", c.volume))
                    .unwrap_or_else(|| "-".to_string())
            };
            if cells.iter().any(|c| c.scenario == scenario && c.metric == metric) {
                out.push_str(&format!(
                    "{:<14}{:<12}{:>8}{:>8}\n",
                    scenario.title(),
                    metric.name(),
                    find(Method::Scalar),
                    find(Method::Vector)
                ));
            }
        }
    }
    out
}

/// Every candidate solve of every round, one JSON object per line, with the
/// solve's inputs.
pub fn write_solve_dump<W: Write>(records: &[RaceRecord], mut out: W) -> std::io::Result<()> {
    for (k, rec) in records.iter().enumerate() {
        let Ok(theta2) = WeightVector::new(rec.config.defender_weights.clone()) else {
            continue;
        };
        for round in &rec.rounds {
            if round.solves.is_empty() {
                continue;
            }
            let d2 = scalarize(&round.defender_costs, &theta2).expect("validated weights");
            let c11 = round.attacker_costs.prime();
            for solve in &round.solves {
                let line = serde_json::json!({
                    "race": k + 1,
                    "round": round.round,
                    "c11": c11,
                    "d2": d2,
                    "solve": solve,
                });
                serde_json::to_writer(&mut out, &line)?;
                out.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}
