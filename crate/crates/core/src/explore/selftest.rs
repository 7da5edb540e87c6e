//! Explorer checks against classifiers with known boundaries.

use serde::{Deserialize, Serialize};

use super::analytic::{HalfSpace, Plane, Sphere};
use super::{explore, ExploreConfig, ExploreError, ExplorationReport, Unit};
use crate::ConfigError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Sphere,
    Plane,
    HalfSpace,
}

impl Shape {
    pub const ALL: [Shape; 3] = [Shape::Sphere, Shape::Plane, Shape::HalfSpace];

    pub fn name(self) -> &'static str {
        match self {
            Shape::Sphere => "sphere",
            Shape::Plane => "plane",
            Shape::HalfSpace => "half_space",
        }
    }
}

impl std::str::FromStr for Shape {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Shape::ALL
            .into_iter()
            .find(|m| m.name() == s || (s == "halfspace" && *m == Shape::HalfSpace))
            .ok_or_else(|| ConfigError::new("selftest", format!("unknown shape `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub shape: Shape,
    pub checks: Vec<Check>,
    pub report: ExplorationReport,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct Geometry {
    /// Distance from a unit-cube point to the surface.
    distance: Box<dyn Fn(&Unit) -> f64>,
    /// Exact normal toward failure at a point near the surface.
    normal: Box<dyn Fn(&Unit) -> Unit>,
    volume: f64,
}

fn geometry(shape: Shape) -> (Box<dyn super::Classifier>, Geometry) {
    match shape {
        Shape::Sphere => {
            let s = Sphere {
                center: [0.5; 3],
                radius: 0.3,
            };
            let geo = Geometry {
                distance: Box::new(move |u| s.distance_to_surface(u)),
                normal: Box::new(move |u| {
                    let d = super::sub(&s.center, u);
                    super::normalize(&d).unwrap_or([1.0, 0.0, 0.0])
                }),
                volume: 1.0 - 4.0 / 3.0 * std::f64::consts::PI * 0.027,
            };
            (Box::new(s), geo)
        }
        Shape::Plane => {
            let p = Plane {
                normal: [1.0, 1.0, 1.0],
                offset: 1.5,
            };
            let n = 1.0 / 3f64.sqrt();
            let geo = Geometry {
                distance: Box::new(move |u| p.signed_distance(u).abs()),
                normal: Box::new(move |_| [n; 3]),
                volume: 0.5,
            };
            (Box::new(p), geo)
        }
        Shape::HalfSpace => {
            let h = HalfSpace {
                axis: 0,
                threshold: 0.3,
            };
            let geo = Geometry {
                distance: Box::new(move |u| (u[h.axis] - h.threshold).abs()),
                normal: Box::new(|_| [-1.0, 0.0, 0.0]),
                volume: 0.7,
            };
            (Box::new(h), geo)
        }
    }
}

/// Explores `shape` and checks surface distance, normal direction, caps and volume.
pub fn run_selftest(shape: Shape, config: &ExploreConfig) -> Result<SelftestReport, ExploreError> {
    let (mut classifier, geo) = geometry(shape);
    let report = explore(classifier.as_mut(), config)?;
    let mut checks = Vec::new();
    let mut check = |name: &str, passed: bool, detail: String| {
        checks.push(Check {
            name: name.to_string(),
            passed,
            detail,
        })
    };

    let worst = report
        .boundary
        .iter()
        .map(|b| (geo.distance)(&b.midpoint.to_unit()))
        .fold(0.0, f64::max);
    check(
        "midpoints_on_surface",
        !report.boundary.is_empty() && worst <= config.resolution,
        format!("{} points, worst distance {worst:.4}", report.boundary.len()),
    );

    let max_angle = report
        .boundary
        .iter()
        .map(|b| {
            let exact = (geo.normal)(&b.midpoint.to_unit());
            super::dot(&exact, &b.normal).clamp(-1.0, 1.0).acos().to_degrees()
        })
        .fold(0.0, f64::max);
    check(
        "normals_toward_failure",
        max_angle < 90.0,
        format!("max angle to exact normal {max_angle:.1} deg"),
    );

    check(
        "caps_respected",
        report.samples_used <= config.sample_cap && report.boundary.len() <= config.point_cap,
        format!(
            "{} of {} samples, {} of {} points",
            report.samples_used,
            config.sample_cap,
            report.boundary.len(),
            config.point_cap
        ),
    );

    let err = (report.volume_estimate - geo.volume).abs();
    check(
        "volume",
        err <= 0.02,
        format!("estimate {:.4}, exact {:.4}", report.volume_estimate, geo.volume),
    );

    Ok(SelftestReport { shape, checks, report })
}
