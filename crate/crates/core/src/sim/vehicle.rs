use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Kinematic bicycle state. `heading` is the yaw angle and `slip` the angle
/// between the velocity vector and the heading.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    pub v: f64,
    pub heading: f64,
    pub slip: f64,
}

impl VehicleState {
    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    /// Corners of the rectangular footprint centred on the state.
    pub fn footprint(&self, length: f64, width: f64) -> [[f64; 2]; 4] {
        let (s, c) = self.heading.sin_cos();
        let (hl, hw) = (length / 2.0, width / 2.0);
        [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)].map(|(a, b)| [self.x + a * c - b * s, self.y + a * s + b * c])
    }
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleParams {
    /// Centre of mass to front axle (m).
    pub l_front: f64,
    /// Centre of mass to rear axle (m).
    pub l_rear: f64,
    pub v_max: f64,
    /// Quadratic drag coefficient (1/m); deceleration `drag * v^2`.
    pub drag: f64,
    pub length: f64,
    pub width: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            l_front: 1.0,
            l_rear: 1.0,
            v_max: 6.0,
            drag: 0.0,
            length: 4.0,
            width: 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionSpec {
    pub accel: f64,
    pub steer: f64,
    /// One-based index: 1-3 brake, 4-6 coast, 7-9 accelerate; each group left, straight, right.
    pub index: usize,
}

/// The nine static actions in index order.
pub fn action_set(accel: f64, steer: f64) -> [ActionSpec; 9] {
    std::array::from_fn(|k| ActionSpec {
        accel: [-accel, 0.0, accel][k / 3],
        steer: [steer, 0.0, -steer][k % 3],
        index: k + 1,
    })
}

/// One step of the kinematic bicycle model.
///
/// Speed changes linearly over the step (drag evaluated at the start of the
/// step) and is clamped to `[0, v_max]`; position follows the exact arc
/// traced at the step's mean speed, so constant-speed motion is integrated
/// without discretization error.
pub fn step_bicycle(state: &VehicleState, action: &ActionSpec, dt: f64, params: &VehicleParams) -> VehicleState {
    debug_assert!(dt > 0.0);
    let wheelbase = params.l_front + params.l_rear;
    let slip = (params.l_rear / wheelbase * action.steer.tan()).atan();
    let v_dot = action.accel - params.drag * state.v * state.v;
    let v_end = (state.v + v_dot * dt).clamp(0.0, params.v_max);
    let v_mean = 0.5 * (state.v + v_end);
    let yaw_rate = v_mean * slip.sin() / params.l_rear;
    let course = state.heading + slip;
    let turn = yaw_rate * dt;
    let (dx, dy) = if turn.abs() < 1e-9 {
        (v_mean * dt * course.cos(), v_mean * dt * course.sin())
    } else {
        let radius = v_mean / yaw_rate;
        (
            radius * ((course + turn).sin() - course.sin()),
            radius * (course.cos() - (course + turn).cos()),
        )
    };
    VehicleState {
        x: state.x + dx,
        y: state.y + dy,
        v: v_end,
        heading: wrap_angle(state.heading + turn),
        slip,
    }
}

/// Turning radius of the centre of mass at a fixed steering angle.
pub fn turning_radius(steer: f64, params: &VehicleParams) -> f64 {
    let slip = (params.l_rear / (params.l_front + params.l_rear) * steer.tan()).atan();
    params.l_rear / slip.sin().abs()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// `points[0]` is the current state; one point per `dt` after that.
    pub points: Vec<VehicleState>,
    pub action: ActionSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotionParams {
    pub dt: f64,
    pub horizon: f64,
    pub accel: f64,
    pub steer: f64,
}

impl Default for MotionParams {
    fn default() -> Self {
        Self {
            dt: 0.1,
            horizon: 1.0,
            accel: 2.0,
            steer: 0.2,
        }
    }
}

impl MotionParams {
    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round().max(1.0) as usize
    }
}

pub fn generate_trajectories(
    state: &VehicleState,
    motion: &MotionParams,
    vehicle: &VehicleParams,
) -> Vec<Trajectory> {
    action_set(motion.accel, motion.steer)
        .into_iter()
        .map(|action| {
            let mut points = Vec::with_capacity(motion.steps() + 1);
            points.push(*state);
            for _ in 0..motion.steps() {
                let last = points[points.len() - 1];
                points.push(step_bicycle(&last, &action, motion.dt, vehicle));
            }
            Trajectory { points, action }
        })
        .collect()
}

/// Separating-axis overlap test for two oriented rectangles.
pub fn rectangles_overlap(a: &[[f64; 2]; 4], b: &[[f64; 2]; 4]) -> bool {
    let axes = |r: &[[f64; 2]; 4]| [[r[1][0] - r[0][0], r[1][1] - r[0][1]], [r[3][0] - r[0][0], r[3][1] - r[0][1]]];
    for axis in axes(a).into_iter().chain(axes(b)) {
        let project = |r: &[[f64; 2]; 4]| {
            r.iter()
                .map(|p| p[0] * axis[0] + p[1] * axis[1])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
        };
        let (a_lo, a_hi) = project(a);
        let (b_lo, b_hi) = project(b);
        if a_hi < b_lo || b_hi < a_lo {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn start(v: f64) -> VehicleState {
        VehicleState {
            x: 1.0,
            y: -2.0,
            v,
            heading: 0.4,
            slip: 0.0,
        }
    }

    #[test]
    fn straight_line_step() {
        let p = VehicleParams::default();
        let a = ActionSpec {
            accel: 0.0,
            steer: 0.0,
            index: 5,
        };
        let s = step_bicycle(&start(5.0), &a, 0.1, &p);
        assert_eq!(s.slip, 0.0);
        assert_eq!(s.heading, 0.4);
        assert!((s.x - (1.0 + 0.5 * 0.4f64.cos())).abs() < 1e-12);
        assert!((s.y - (-2.0 + 0.5 * 0.4f64.sin())).abs() < 1e-12);
    }

    #[test]
    fn speed_saturates() {
        let p = VehicleParams::default();
        let a = ActionSpec {
            accel: 2.0,
            steer: 0.0,
            index: 8,
        };
        let s = step_bicycle(&start(p.v_max), &a, 0.1, &p);
        assert_eq!(s.v, p.v_max);
        let b = ActionSpec {
            accel: -2.0,
            steer: 0.0,
            index: 2,
        };
        assert_eq!(step_bicycle(&start(0.1), &b, 0.1, &p).v, 0.0);
    }

    #[test]
    fn action_indices_follow_accel_then_steer_groups() {
        let acts = action_set(2.0, 0.3);
        assert_eq!(acts[0].accel, -2.0);
        assert_eq!(acts[0].steer, 0.3);
        assert_eq!(acts[4].accel, 0.0);
        assert_eq!(acts[4].steer, 0.0);
        assert_eq!(acts[8].accel, 2.0);
        assert_eq!(acts[8].steer, -0.3);
        assert!(acts.iter().enumerate().all(|(k, a)| a.index == k + 1));
    }

    #[test]
    fn wrap_angle_range() {
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(0.5) - 0.5).abs() < 1e-15);
        assert!((wrap_angle(-7.0) - (-7.0 + 2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn overlap_is_symmetric_and_detects_contact() {
        let a = start(0.0).footprint(4.0, 2.0);
        let mut other = start(0.0);
        other.x += 3.9 * 0.4f64.cos();
        other.y += 3.9 * 0.4f64.sin();
        let b = other.footprint(4.0, 2.0);
        assert!(rectangles_overlap(&a, &b) && rectangles_overlap(&b, &a));
        other.x += 0.2 * 0.4f64.cos();
        other.y += 0.2 * 0.4f64.sin();
        let b = other.footprint(4.0, 2.0);
        assert!(!rectangles_overlap(&a, &b) && !rectangles_overlap(&b, &a));
        // Rotated 90 degrees, side by side 1.9 m apart laterally: corner contact.
        let mut turned = start(0.0);
        turned.heading += PI / 2.0;
        assert!(rectangles_overlap(&a, &turned.footprint(4.0, 2.0)));
    }
}
