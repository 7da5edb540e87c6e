//! Round-by-round two-vehicle race on the circular track.

use serde::{Deserialize, Serialize};

use super::cost::{build_cost_tensors, CostParams, OBJECTIVES};
use super::track::{Track, UnwrappedAngle};
use super::vehicle::{generate_trajectories, rectangles_overlap, MotionParams, VehicleParams, VehicleState};
use crate::adjust::{select_policy, select_policy_traced, AdjustOptions, SelectionMethod, SolveLog};
use crate::error::ConfigError;
use crate::game::{scalarize, security_policy_col, security_policy_row, CostMatrix, CostTensor, PolicyPair, WeightVector};

pub const MAX_ROUNDS: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    CloseTail,
    FarTail,
    InsideEdge,
    OutsideEdge,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::CloseTail, Scenario::FarTail, Scenario::InsideEdge, Scenario::OutsideEdge];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::CloseTail => "close_tail",
            Scenario::FarTail => "far_tail",
            Scenario::InsideEdge => "inside_edge",
            Scenario::OutsideEdge => "outside_edge",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Scenario::CloseTail => "Close Tail",
            Scenario::FarTail => "Far Tail",
            Scenario::InsideEdge => "Inside Edge",
            Scenario::OutsideEdge => "Outside Edge",
        }
    }

    /// Default attacker placement relative to the defender.
    pub fn default_spawn(self) -> SpawnSpec {
        let (gap, lateral) = match self {
            Scenario::CloseTail => (8.0, 0.0),
            Scenario::FarTail => (16.0, 0.0),
            Scenario::InsideEdge => (10.0, -4.0),
            Scenario::OutsideEdge => (10.0, 4.0),
        };
        SpawnSpec {
            gap,
            lateral,
            ..SpawnSpec::default()
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| ConfigError::new("scenario", format!("unknown scenario `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Security policy of the weighted-sum costs.
    Scalar,
    /// Adjusted-cost policy selection with scalar fallback.
    Vector,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Scalar, Method::Vector];

    pub fn name(self) -> &'static str {
        match self {
            Method::Scalar => "scalar",
            Method::Vector => "vector",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| ConfigError::new("method", format!("unknown method `{s}`")))
    }
}

/// Initial placement: the defender sits on the centerline at track angle 0,
/// the attacker `gap` metres of centerline arc behind it, offset `lateral`
/// metres outward.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpawnSpec {
    pub gap: f64,
    pub lateral: f64,
    pub attacker_speed: f64,
    pub defender_speed: f64,
}

impl Default for SpawnSpec {
    fn default() -> Self {
        Self {
            gap: 8.0,
            lateral: 0.0,
            attacker_speed: 4.0,
            defender_speed: 4.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Physics {
    pub rounds: usize,
    pub track: Track,
    pub motion: MotionParams,
    pub attacker: VehicleParams,
    pub defender: VehicleParams,
}

impl Default for Physics {
    fn default() -> Self {
        let motion = MotionParams::default();
        // Full throttle balances drag exactly at top speed.
        let vehicle = |v_max: f64| VehicleParams {
            v_max,
            drag: motion.accel / (v_max * v_max),
            ..VehicleParams::default()
        };
        Self {
            rounds: MAX_ROUNDS,
            track: Track::default(),
            motion,
            attacker: vehicle(9.0),
            defender: vehicle(6.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RaceConfig {
    pub scenario: Scenario,
    pub method: Method,
    pub attacker_weights: Vec<f64>,
    pub defender_weights: Vec<f64>,
    pub costs: CostParams,
    pub physics: Physics,
    /// Overrides the scenario's default placement.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spawn: Option<SpawnSpec>,
    pub adjust: AdjustOptions,
    /// Races are deterministic; the seed is carried for provenance.
    pub seed: u64,
    /// Keep every candidate solve of the vector method in the round logs.
    pub log_solves: bool,
}

impl Default for RaceConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::CloseTail,
            method: Method::Vector,
            attacker_weights: vec![1.0, 1.0, 1.0],
            defender_weights: vec![1.0, 1.0, 1.0],
            costs: CostParams::default(),
            physics: Physics::default(),
            spawn: None,
            adjust: AdjustOptions {
                tie_tolerance: 1e-4,
                ..AdjustOptions::default()
            },
            seed: 0,
            log_solves: false,
        }
    }
}

impl RaceConfig {
    pub fn spawn_spec(&self) -> SpawnSpec {
        self.spawn.unwrap_or_else(|| self.scenario.default_spawn())
    }

    pub fn validate(&self) -> Result<(WeightVector, WeightVector), ConfigError> {
        let weights = |field: &str, w: &[f64]| {
            if w.len() != OBJECTIVES {
                return Err(ConfigError::new(field, format!("expected {OBJECTIVES} weights, got {}", w.len())));
            }
            WeightVector::new(w.to_vec()).map_err(|e| ConfigError::new(field, e.to_string()))
        };
        let attacker = weights("attacker_weights", &self.attacker_weights)?;
        let defender = weights("defender_weights", &self.defender_weights)?;
        self.costs.validate()?;

        let p = &self.physics;
        if p.rounds == 0 || p.rounds > MAX_ROUNDS {
            return Err(ConfigError::new("physics.rounds", format!("must be in 1..={MAX_ROUNDS}")));
        }
        if !(p.track.r_inner > 0.0 && p.track.r_inner < p.track.r_outer) {
            return Err(ConfigError::new("physics.track", "need 0 < r_inner < r_outer"));
        }
        let positive = [
            ("physics.motion.dt", p.motion.dt),
            ("physics.motion.horizon", p.motion.horizon),
            ("physics.attacker.v_max", p.attacker.v_max),
            ("physics.defender.v_max", p.defender.v_max),
            ("physics.attacker.l_rear", p.attacker.l_rear),
            ("physics.defender.l_rear", p.defender.l_rear),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ConfigError::new(field, "must be positive"));
            }
        }
        for (field, value) in [("physics.attacker.drag", p.attacker.drag), ("physics.defender.drag", p.defender.drag)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ConfigError::new(field, "must be non-negative"));
            }
        }
        if p.motion.dt > p.motion.horizon {
            return Err(ConfigError::new("physics.motion.dt", "must not exceed the horizon"));
        }
        let spawn = self.spawn_spec();
        if spawn.lateral.abs() >= 0.5 * (p.track.r_outer - p.track.r_inner) {
            return Err(ConfigError::new("spawn.lateral", "attacker would spawn off the track"));
        }
        if spawn.gap < 0.0 || spawn.attacker_speed < 0.0 || spawn.defender_speed < 0.0 {
            return Err(ConfigError::new("spawn", "gap and speeds must be non-negative"));
        }
        if self.adjust.epsilon <= 0.0 || self.adjust.max_iterations == 0 {
            return Err(ConfigError::new("adjust", "epsilon and max_iterations must be positive"));
        }
        Ok((attacker, defender))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundMethod {
    Scalar,
    Adjusted,
    ScalarFallback,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub round: usize,
    /// States before the round's decision.
    pub attacker: VehicleState,
    pub defender: VehicleState,
    pub attacker_costs: CostTensor,
    pub defender_costs: CostTensor,
    pub choice: PolicyPair,
    pub method: RoundMethod,
    pub candidates: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjustment_norm: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub solves: Vec<SolveLog>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RaceRecord {
    pub config: RaceConfig,
    pub rounds: Vec<RoundLog>,
    pub passed: bool,
    pub pass_round: Option<usize>,
    pub out_of_bounds: bool,
    pub collided: bool,
    pub min_distance: f64,
    /// Attacker's costs at the chosen action pair, summed over rounds.
    pub accumulated_costs: [f64; OBJECTIVES],
    /// Fraction of rounds the attacker finished ahead.
    pub lead_fraction: f64,
    pub adjusted_rounds: usize,
    pub final_attacker: VehicleState,
    pub final_defender: VehicleState,
}

pub fn run_race(config: &RaceConfig) -> Result<RaceRecord, ConfigError> {
    run_race_with(config, &mut |_, d2: &CostMatrix| security_policy_col(d2).0)
}

/// Runs a race with a custom defender policy mapping `(round, D2)` to a
/// zero-based column. The attacker always follows `config.method`.
pub fn run_race_with(
    config: &RaceConfig,
    defender_policy: &mut dyn FnMut(usize, &CostMatrix) -> usize,
) -> Result<RaceRecord, ConfigError> {
    let (attacker_weights, defender_weights) = config.validate()?;
    let physics = &config.physics;
    let track = &physics.track;
    let spawn = config.spawn_spec();

    let mut defender = track.spawn(0.0, 0.0, spawn.defender_speed.min(physics.defender.v_max));
    let mut attacker = track.spawn(
        -spawn.gap / track.centerline_radius(),
        spawn.lateral,
        spawn.attacker_speed.min(physics.attacker.v_max),
    );
    let mut attacker_angle = UnwrappedAngle::new(track.angle_of(attacker.position()));
    let mut defender_angle = UnwrappedAngle::new(track.angle_of(defender.position()));

    let mut rounds = Vec::with_capacity(physics.rounds);
    let mut min_distance = distance(&attacker, &defender);
    let mut collided = overlap(&attacker, &defender, physics);
    let mut out_of_bounds = off_track(&attacker, physics);
    let mut was_behind = attacker_angle.total < defender_angle.total;
    let mut pass_round = None;
    let mut lead_rounds = 0;
    let mut accumulated = [0.0; OBJECTIVES];
    let mut adjusted_rounds = 0;

    for round in 1..=physics.rounds {
        let attacker_options = generate_trajectories(&attacker, &physics.motion, &physics.attacker);
        let defender_options = generate_trajectories(&defender, &physics.motion, &physics.defender);
        let (c1, c2) = build_cost_tensors(&attacker_options, &defender_options, physics.motion.dt, track, &config.costs);
        let d2 = scalarize(&c2, &defender_weights).expect("validated weights");
        let col = defender_policy(round, &d2).min(defender_options.len() - 1);

        let (row, method, candidates, adjustment_norm, solves) = match config.method {
            Method::Scalar => {
                let d1 = scalarize(&c1, &attacker_weights).expect("validated weights");
                (security_policy_row(&d1).0, RoundMethod::Scalar, 0, None, Vec::new())
            }
            Method::Vector => {
                let sel = if config.log_solves {
                    select_policy_traced(&c1, &d2, &attacker_weights, &config.adjust)
                } else {
                    select_policy(&c1, &d2, &attacker_weights, &config.adjust)
                }
                .expect("consistent game shapes");
                let method = match sel.method {
                    SelectionMethod::Adjusted => RoundMethod::Adjusted,
                    SelectionMethod::ScalarFallback => RoundMethod::ScalarFallback,
                };
                let norm = sel.solution.as_ref().map(|s| s.objective_value);
                (sel.row_policy, method, sel.candidates_tried, norm, sel.solves)
            }
        };
        if method == RoundMethod::Adjusted {
            adjusted_rounds += 1;
        }
        for (h, acc) in accumulated.iter_mut().enumerate() {
            *acc += c1.objective(h).get(row, col);
        }

        let path_a = &attacker_options[row].points;
        let path_d = &defender_options[col].points;
        for (a, d) in path_a.iter().zip(path_d).skip(1) {
            min_distance = min_distance.min(distance(a, d));
            collided |= overlap(a, d, physics);
            out_of_bounds |= off_track(a, physics);
        }

        rounds.push(RoundLog {
            round,
            attacker,
            defender,
            attacker_costs: c1,
            defender_costs: c2,
            choice: PolicyPair::new(row, col),
            method,
            candidates,
            adjustment_norm,
            solves,
        });

        attacker = *path_a.last().expect("non-empty trajectory");
        defender = *path_d.last().expect("non-empty trajectory");
        let a = attacker_angle.update(track.angle_of(attacker.position()));
        let d = defender_angle.update(track.angle_of(defender.position()));
        if a > d {
            lead_rounds += 1;
            if was_behind && pass_round.is_none() {
                pass_round = Some(round);
            }
        } else {
            was_behind = true;
        }
    }

    Ok(RaceRecord {
        config: config.clone(),
        passed: pass_round.is_some(),
        pass_round,
        out_of_bounds,
        collided,
        min_distance,
        accumulated_costs: accumulated,
        lead_fraction: lead_rounds as f64 / rounds.len() as f64,
        adjusted_rounds,
        rounds,
        final_attacker: attacker,
        final_defender: defender,
    })
}

fn distance(a: &VehicleState, b: &VehicleState) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

fn overlap(a: &VehicleState, b: &VehicleState, physics: &Physics) -> bool {
    rectangles_overlap(
        &a.footprint(physics.attacker.length, physics.attacker.width),
        &b.footprint(physics.defender.length, physics.defender.width),
    )
}

fn off_track(state: &VehicleState, physics: &Physics) -> bool {
    state
        .footprint(physics.attacker.length, physics.attacker.width)
        .iter()
        .any(|&corner| !physics.track.contains(corner))
}
