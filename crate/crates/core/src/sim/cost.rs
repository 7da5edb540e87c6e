//! Per-point costs (progress, bounds, proximity) and their aggregation into
//! 9x9x3 cost tensors over candidate trajectories.

use serde::{Deserialize, Serialize};

use super::track::Track;
use super::vehicle::{wrap_angle, Trajectory};
use crate::game::{CostMatrix, CostTensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostStructure {
    /// Piecewise-linear costs with flat regions.
    Linear,
    /// Smooth radial-basis costs.
    Rbf,
}

impl CostStructure {
    pub fn name(self) -> &'static str {
        match self {
            CostStructure::Linear => "linear",
            CostStructure::Rbf => "rbf",
        }
    }
}

impl std::str::FromStr for CostStructure {
    type Err = crate::ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [CostStructure::Linear, CostStructure::Rbf]
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| crate::ConfigError::new("structure", format!("unknown cost structure `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostParams {
    pub structure: CostStructure,
    /// Multiplier on the angular progress difference.
    pub progress_scale: f64,
    /// Proximity threshold for the linear structure (m).
    pub tau: f64,
    /// Peak proximity cost for the linear structure.
    pub q: f64,
    /// Bounds slope for the radial-basis structure (m^2).
    pub s_b: f64,
    /// Proximity slope for the radial-basis structure (m^2).
    pub s_c: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            structure: CostStructure::Rbf,
            progress_scale: 2.0,
            tau: 8.0,
            q: 8.0,
            s_b: 100.0,
            s_c: 5.0,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<(), crate::ConfigError> {
        use crate::ConfigError;
        for (name, value) in [("progress_scale", self.progress_scale), ("tau", self.tau), ("s_b", self.s_b), ("s_c", self.s_c)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ConfigError::new(format!("costs.{name}"), "must be positive"));
            }
        }
        if !self.q.is_finite() {
            return Err(ConfigError::new("costs.q", "must be finite"));
        }
        Ok(())
    }
}

pub const OBJECTIVES: usize = 3;

/// Progress, bounds and proximity cost of occupying `p`.
///
/// `own_angle` and `opponent_angle` are track angles; the progress cost is
/// their signed smallest difference, positive while behind.
pub fn point_costs(
    p: [f64; 2],
    own_angle: f64,
    opponent_angle: f64,
    opponent: [f64; 2],
    track: &Track,
    params: &CostParams,
) -> [f64; OBJECTIVES] {
    let progress = params.progress_scale * wrap_angle(opponent_angle - own_angle);
    let gap = (opponent[0] - p[0]).hypot(opponent[1] - p[1]);
    match params.structure {
        CostStructure::Linear => {
            let bounds = track.distance_off_track(p);
            let proximity = if gap < params.tau { params.q - gap } else { 0.0 };
            [progress, bounds, proximity]
        }
        CostStructure::Rbf => {
            let off_center = track.distance_to_centerline(p);
            let bounds = 1.0 - (-2.0 * off_center * off_center / params.s_b).exp();
            let proximity = (-2.0 * gap * gap / params.s_c).exp();
            [progress, bounds, proximity]
        }
    }
}

/// Time-integrated cost of following `own` while the opponent follows `other`,
/// pairing points at equal timestamps, by the trapezoid rule over the horizon.
pub fn trajectory_costs(
    own: &Trajectory,
    other: &Trajectory,
    dt: f64,
    track: &Track,
    params: &CostParams,
) -> [f64; OBJECTIVES] {
    let mut total = [0.0; OBJECTIVES];
    let last = own.points.len().min(other.points.len()).saturating_sub(1);
    for (k, (p, o)) in own.points.iter().zip(&other.points).enumerate().take(last + 1) {
        let c = point_costs(
            p.position(),
            track.angle_of(p.position()),
            track.angle_of(o.position()),
            o.position(),
            track,
            params,
        );
        let weight = if k == 0 || k == last { 0.5 * dt } else { dt };
        for (t, v) in total.iter_mut().zip(c) {
            *t += v * weight;
        }
    }
    total
}

/// Cost tensors for both players, rows indexed by player 1's trajectory and
/// columns by player 2's.
pub fn build_cost_tensors(
    player1: &[Trajectory],
    player2: &[Trajectory],
    dt: f64,
    track: &Track,
    params: &CostParams,
) -> (CostTensor, CostTensor) {
    let (n, m) = (player1.len(), player2.len());
    let mut c1 = vec![vec![0.0; n * m]; OBJECTIVES];
    let mut c2 = vec![vec![0.0; n * m]; OBJECTIVES];
    for (i, t1) in player1.iter().enumerate() {
        for (j, t2) in player2.iter().enumerate() {
            let a = trajectory_costs(t1, t2, dt, track, params);
            let b = trajectory_costs(t2, t1, dt, track, params);
            for h in 0..OBJECTIVES {
                c1[h][i * m + j] = a[h];
                c2[h][i * m + j] = b[h];
            }
        }
    }
    let tensor = |data: Vec<Vec<f64>>| {
        CostTensor::new(
            data.into_iter()
                .map(|d| CostMatrix::from_vec(n, m, d).expect("finite trajectory costs"))
                .collect(),
        )
        .expect("uniform shapes")
    };
    (tensor(c1), tensor(c2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rbf() -> CostParams {
        CostParams::default()
    }

    fn linear() -> CostParams {
        CostParams {
            structure: CostStructure::Linear,
            ..CostParams::default()
        }
    }

    #[test]
    fn equal_angles_cost_nothing_for_progress() {
        let t = Track::default();
        for params in [rbf(), linear()] {
            let c = point_costs([30.0, 5.0], 0.7, 0.7, [0.0, 35.0], &t, &params);
            assert_eq!(c[0], 0.0);
        }
    }

    #[test]
    fn rbf_at_zero_distance() {
        let t = Track::default();
        let p = [32.5, 0.0];
        let c = point_costs(p, 0.0, 0.1, p, &t, &rbf());
        assert_eq!(c[1], 0.0);
        assert_eq!(c[2], 1.0);
    }

    #[test]
    fn linear_proximity_indicator() {
        let t = Track::default();
        let p = [32.5, 0.0];
        let params = linear();
        assert_eq!(point_costs(p, 0.0, 0.0, [32.5, 8.0], &t, &params)[2], 0.0);
        assert_eq!(point_costs(p, 0.0, 0.0, [32.5, 9.0], &t, &params)[2], 0.0);
        assert!((point_costs(p, 0.0, 0.0, [32.5, 3.0], &t, &params)[2] - 5.0).abs() < 1e-12);
        // Flat inside the track, growing outside.
        assert_eq!(point_costs([26.0, 0.0], 0.0, 0.0, [0.0, 0.0], &t, &params)[1], 0.0);
        assert!((point_costs([42.0, 0.0], 0.0, 0.0, [0.0, 0.0], &t, &params)[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn progress_wraps_at_seam() {
        let t = Track::default();
        let c = point_costs([0.0, 0.0], 3.0, -3.0, [1e6, 0.0], &t, &rbf());
        assert!((c[0] - rbf().progress_scale * (2.0 * std::f64::consts::PI - 6.0)).abs() < 1e-12);
    }
}
