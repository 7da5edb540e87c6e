use serde::{Deserialize, Serialize};

use super::vehicle::{wrap_angle, VehicleState};

/// Circular annulus driven counter-clockwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Track {
    pub center: [f64; 2],
    pub r_inner: f64,
    pub r_outer: f64,
}

impl Default for Track {
    fn default() -> Self {
        Self {
            center: [0.0, 0.0],
            r_inner: 25.0,
            r_outer: 40.0,
        }
    }
}

impl Track {
    pub fn centerline_radius(&self) -> f64 {
        0.5 * (self.r_inner + self.r_outer)
    }

    pub fn radius_of(&self, p: [f64; 2]) -> f64 {
        (p[0] - self.center[0]).hypot(p[1] - self.center[1])
    }

    /// Track angle of a point in `(-pi, pi]`, increasing in the racing direction.
    pub fn angle_of(&self, p: [f64; 2]) -> f64 {
        (p[1] - self.center[1]).atan2(p[0] - self.center[0])
    }

    pub fn distance_to_centerline(&self, p: [f64; 2]) -> f64 {
        (self.radius_of(p) - self.centerline_radius()).abs()
    }

    /// Distance to the nearest boundary point, zero anywhere on the track.
    pub fn distance_off_track(&self, p: [f64; 2]) -> f64 {
        let r = self.radius_of(p);
        (self.r_inner - r).max(r - self.r_outer).max(0.0)
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let r = self.radius_of(p);
        r >= self.r_inner && r <= self.r_outer
    }

    /// State at track angle `angle` and signed lateral offset from the
    /// centerline (positive outward), heading along the track.
    pub fn spawn(&self, angle: f64, lateral: f64, speed: f64) -> VehicleState {
        let r = self.centerline_radius() + lateral;
        VehicleState {
            x: self.center[0] + r * angle.cos(),
            y: self.center[1] + r * angle.sin(),
            v: speed,
            heading: wrap_angle(angle + std::f64::consts::FRAC_PI_2),
            slip: 0.0,
        }
    }
}

/// Accumulates a continuous track angle across the `-pi/pi` seam.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnwrappedAngle {
    pub total: f64,
    last: f64,
}

impl UnwrappedAngle {
    pub fn new(angle: f64) -> Self {
        Self {
            total: angle,
            last: angle,
        }
    }

    pub fn update(&mut self, angle: f64) -> f64 {
        self.total += wrap_angle(angle - self.last);
        self.last = angle;
        self.total
    }
}
