//! Two-vehicle racing on a circular track.

pub mod cost;
pub mod race;
pub mod track;
pub mod vehicle;

pub use cost::{build_cost_tensors, point_costs, trajectory_costs, CostParams, CostStructure, OBJECTIVES};
pub use race::{run_race, run_race_with, Method, Physics, RaceConfig, RaceRecord, RoundLog, RoundMethod, Scenario, SpawnSpec};
pub use track::Track;
pub use vehicle::{
    action_set, generate_trajectories, rectangles_overlap, step_bicycle, turning_radius, wrap_angle, ActionSpec, MotionParams,
    Trajectory, VehicleParams, VehicleState,
};
