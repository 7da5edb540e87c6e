//! Weight-space exploration: grid search, boundary acquisition and adherence,
//! and performance-mode volume estimation.
//!
//! All geometry happens in the unit cube; [`ParamPoint`] converts to and from
//! the attacker's weight ranges.

pub mod analytic;
pub mod grid;
pub mod selftest;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::sim::{run_race, Method, RaceConfig, Scenario};
use crate::ConfigError;

pub use grid::{grid_points, grid_search, GridSpec};

pub const DIM: usize = 3;

/// A point of the unit cube.
pub type Unit = [f64; DIM];

/// Lower and upper bounds of each weight.
pub const THETA_LOWER: Unit = [0.001, 0.0, 0.0];
pub const THETA_UPPER: Unit = [1.0, 1.0, 1.0];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    pub theta: [f64; DIM],
}

impl ParamPoint {
    pub fn from_unit(u: &Unit) -> Self {
        Self {
            theta: std::array::from_fn(|k| THETA_LOWER[k] + u[k].clamp(0.0, 1.0) * (THETA_UPPER[k] - THETA_LOWER[k])),
        }
    }

    pub fn to_unit(&self) -> Unit {
        std::array::from_fn(|k| (self.theta[k] - THETA_LOWER[k]) / (THETA_UPPER[k] - THETA_LOWER[k]))
    }

    pub fn in_range(&self) -> bool {
        self.theta
            .iter()
            .zip(THETA_LOWER.iter().zip(&THETA_UPPER))
            .all(|(t, (lo, hi))| t.is_finite() && t >= lo && t <= hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Class {
    Success,
    Failure,
}

impl Class {
    pub fn name(self) -> &'static str {
        match self {
            Class::Success => "success",
            Class::Failure => "failure",
        }
    }
}

/// Race outcome that decides success.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Success when the attacker passes.
    Passes,
    /// Success when the attacker stays on the track.
    Bounds,
    /// Success when the vehicles never touch.
    Collisions,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Passes, Metric::Bounds, Metric::Collisions];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Passes => "passes",
            Metric::Bounds => "bounds",
            Metric::Collisions => "collisions",
        }
    }

    pub fn classify(self, record: &crate::sim::RaceRecord) -> Class {
        let ok = match self {
            Metric::Passes => record.passed,
            Metric::Bounds => !record.out_of_bounds,
            Metric::Collisions => !record.collided,
        };
        if ok {
            Class::Success
        } else {
            Class::Failure
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| ConfigError::new("metric", format!("unknown metric `{s}`")))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExploreError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("remote evaluation failed: {0}")]
    Remote(String),
}

/// Maps a point of the unit cube to success or failure.
pub trait Classifier {
    fn classify(&mut self, u: &Unit) -> Result<Class, ExploreError>;

    /// Whether a call is cheap enough for direct Monte Carlo volume estimates.
    fn is_cheap(&self) -> bool {
        false
    }
}

impl<C: Classifier + ?Sized> Classifier for &mut C {
    fn classify(&mut self, u: &Unit) -> Result<Class, ExploreError> {
        (**self).classify(u)
    }

    fn is_cheap(&self) -> bool {
        (**self).is_cheap()
    }
}

/// Runs one race per query with the attacker weights taken from the point.
#[derive(Clone, Debug)]
pub struct RaceClassifier {
    pub base: RaceConfig,
    pub metric: Metric,
}

impl RaceClassifier {
    pub fn new(base: RaceConfig, scenario: Scenario, method: Method, metric: Metric) -> Self {
        Self {
            base: RaceConfig {
                scenario,
                method,
                ..base
            },
            metric,
        }
    }

    pub fn config_at(&self, p: &ParamPoint) -> RaceConfig {
        RaceConfig {
            attacker_weights: p.theta.to_vec(),
            ..self.base.clone()
        }
    }
}

impl Classifier for RaceClassifier {
    fn classify(&mut self, u: &Unit) -> Result<Class, ExploreError> {
        let record = run_race(&self.config_at(&ParamPoint::from_unit(u)))?;
        Ok(self.metric.classify(&record))
    }
}

/// Counts classifier calls against a cap.
pub struct Sampler<'a> {
    classifier: &'a mut dyn Classifier,
    used: usize,
    cap: usize,
}

impl<'a> Sampler<'a> {
    pub fn new(classifier: &'a mut dyn Classifier, cap: usize) -> Self {
        Self {
            classifier,
            used: 0,
            cap,
        }
    }

    pub fn used(&self) -> usize {
        self.used
    }

    pub fn exhausted(&self) -> bool {
        self.used >= self.cap
    }

    /// `None` once the cap is reached.
    pub fn classify(&mut self, u: &Unit) -> Result<Option<Class>, ExploreError> {
        if self.exhausted() {
            return Ok(None);
        }
        self.used += 1;
        self.classifier.classify(u).map(Some)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub inside: ParamPoint,
    pub outside: ParamPoint,
    pub midpoint: ParamPoint,
    /// Unit vector in the normalized space pointing toward failure.
    pub normal: [f64; DIM],
}

impl BoundarySample {
    fn from_pair(success: &Unit, failure: &Unit, normal: Unit) -> Self {
        let mid = lerp(success, failure, 0.5);
        Self {
            inside: ParamPoint::from_unit(success),
            outside: ParamPoint::from_unit(failure),
            midpoint: ParamPoint::from_unit(&mid),
            normal,
        }
    }

    pub fn width(&self) -> f64 {
        dist(&self.inside.to_unit(), &self.outside.to_unit())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    PointCap,
    Saturation,
    SampleCap,
    NoFailureFound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeMethod {
    /// Direct classification of uniform samples.
    MonteCarlo,
    /// Sign of the nearest boundary sample's normal.
    BoundaryNormal,
    /// No boundary was found; the volume follows from the sampled class.
    Trivial,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExploreConfig {
    pub resolution: f64,
    pub point_cap: usize,
    pub sample_cap: usize,
    /// Uniform draws for the volume estimate.
    pub volume_samples: usize,
    pub seed: u64,
    /// Maximum probe steps along the normal when a tangent step loses the boundary.
    pub max_probe_steps: usize,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        Self {
            resolution: 0.07,
            point_cap: 250,
            sample_cap: 500,
            volume_samples: 100_000,
            seed: 0,
            max_probe_steps: 4,
        }
    }
}

impl ExploreConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.resolution.is_finite() && self.resolution > 0.0 && self.resolution < 1.0) {
            return Err(ConfigError::new("explore.resolution", "must be in (0, 1)"));
        }
        if self.sample_cap == 0 || self.point_cap == 0 || self.volume_samples == 0 {
            return Err(ConfigError::new("explore", "caps and volume_samples must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplorationReport {
    pub boundary: Vec<BoundarySample>,
    pub samples_used: usize,
    pub volume_estimate: f64,
    pub termination: Termination,
    pub volume_method: VolumeMethod,
}

/// Result of the global search phase.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GlobalSearch {
    Pair { success: Unit, failure: Unit },
    OnlySuccess,
    OnlyFailure,
}

impl GlobalSearch {
    pub fn pair(&self) -> Option<(Unit, Unit)> {
        match *self {
            GlobalSearch::Pair { success, failure } => Some((success, failure)),
            _ => None,
        }
    }
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_unit(rng: &mut impl Rng) -> Unit {
    std::array::from_fn(|_| rng.random::<f64>())
}

/// Uniform sampling until one point of each class is seen or the budget runs out.
pub fn find_boundary_pair(sampler: &mut Sampler, rng: &mut impl Rng) -> Result<GlobalSearch, ExploreError> {
    let (mut success, mut failure) = (None, None);
    while success.is_none() || failure.is_none() {
        let u = random_unit(rng);
        match sampler.classify(&u)? {
            None => break,
            Some(Class::Success) => success = success.or(Some(u)),
            Some(Class::Failure) => failure = failure.or(Some(u)),
        }
    }
    Ok(match (success, failure) {
        (Some(success), Some(failure)) => GlobalSearch::Pair { success, failure },
        (None, Some(_)) => GlobalSearch::OnlyFailure,
        _ => GlobalSearch::OnlySuccess,
    })
}

/// Halves the straddling segment until it is no longer than `resolution`.
/// `None` when the budget runs out first.
pub fn bisect_to_boundary(
    success: Unit,
    failure: Unit,
    sampler: &mut Sampler,
    resolution: f64,
) -> Result<Option<BoundarySample>, ExploreError> {
    let (mut s, mut f) = (success, failure);
    while dist(&s, &f) > resolution {
        let mid = lerp(&s, &f, 0.5);
        match sampler.classify(&mid)? {
            None => return Ok(None),
            Some(Class::Success) => s = mid,
            Some(Class::Failure) => f = mid,
        }
    }
    let normal = normalize(&sub(&f, &s)).unwrap_or([1.0, 0.0, 0.0]);
    Ok(Some(BoundarySample::from_pair(&s, &f, normal)))
}

/// Walks the boundary from `seed`, spreading samples at roughly `resolution`
/// spacing, until a cap is hit or no unexplored direction remains.
pub fn adhere_boundary(
    seed: BoundarySample,
    sampler: &mut Sampler,
    config: &ExploreConfig,
    rng: &mut impl Rng,
) -> Result<(Vec<BoundarySample>, Termination), ExploreError> {
    const DIRECTIONS: usize = 6;
    let res = config.resolution;
    let mut samples = vec![seed];
    let mut frontier = std::collections::VecDeque::from([0usize]);

    while let Some(k) = frontier.pop_front() {
        let current = samples[k];
        let mid = current.midpoint.to_unit();
        let normal = current.normal;
        let (t1, t2) = tangent_basis(&normal);
        let phase = rng.random::<f64>() * std::f64::consts::TAU;
        for d in 0..DIRECTIONS {
            if samples.len() >= config.point_cap {
                return Ok((samples, Termination::PointCap));
            }
            if sampler.exhausted() {
                return Ok((samples, Termination::SampleCap));
            }
            let angle = phase + d as f64 * std::f64::consts::TAU / DIRECTIONS as f64;
            let dir = add(&scale(&t1, angle.cos()), &scale(&t2, angle.sin()));
            let step = add(&mid, &scale(&dir, res));
            if !inside_cube(&step) || nearest_distance(&samples, &step) < 0.5 * res {
                continue;
            }
            let Some(found) = probe_and_bisect(&mid, &dir, &normal, sampler, config)? else {
                continue;
            };
            if nearest_distance(&samples, &found.midpoint.to_unit()) < 0.5 * res {
                continue;
            }
            samples.push(found);
            let idx = samples.len() - 1;
            refresh_normals(&mut samples, idx, res);
            frontier.push_back(idx);
        }
    }
    let termination = if sampler.exhausted() {
        Termination::SampleCap
    } else {
        Termination::Saturation
    };
    Ok((samples, termination))
}

/// Re-fits the normal of sample `idx` and of every sample near it.
fn refresh_normals(samples: &mut [BoundarySample], idx: usize, res: f64) {
    let centre = samples[idx].midpoint.to_unit();
    let near: Vec<usize> = (0..samples.len())
        .filter(|&k| dist(&samples[k].midpoint.to_unit(), &centre) <= NORMAL_RADII[0] * res)
        .collect();
    let fitted: Vec<(usize, Unit)> = near.iter().map(|&k| (k, estimate_normal(samples, k, res))).collect();
    for (k, n) in fitted {
        samples[k].normal = n;
    }
}

/// Classifies the tangent step, then walks along the normal toward the other
/// class and bisects the straddling segment. When the walk finds no class
/// change, the step is rotated about the midpoint from the tangent toward the
/// normal until the class flips; the flip is guaranteed within half a turn.
fn probe_and_bisect(
    mid: &Unit,
    tangent: &Unit,
    normal: &Unit,
    sampler: &mut Sampler,
    config: &ExploreConfig,
) -> Result<Option<BoundarySample>, ExploreError> {
    let res = config.resolution;
    let step = add(mid, &scale(tangent, res));
    let Some(class) = sampler.classify(&step)? else {
        return Ok(None);
    };
    // Success lies against the normal, failure along it.
    let toward = match class {
        Class::Success => *normal,
        Class::Failure => scale(normal, -1.0),
    };
    let straddle = |a: Unit, b: Unit| match class {
        Class::Success => (a, b),
        Class::Failure => (b, a),
    };
    let mut last = step;
    for _ in 0..config.max_probe_steps {
        let next = add(&last, &scale(&toward, res));
        if !inside_cube(&next) {
            break;
        }
        match sampler.classify(&next)? {
            None => return Ok(None),
            Some(c) if c == class => last = next,
            Some(_) => {
                let (s, f) = straddle(last, next);
                return bisect_to_boundary(s, f, sampler, res);
            }
        }
    }
    let mut last = step;
    for k in 1..=ROTATION_STEPS {
        let angle = k as f64 * std::f64::consts::PI / ROTATION_STEPS as f64;
        let dir = add(&scale(tangent, angle.cos()), &scale(&toward, angle.sin()));
        let next = add(mid, &scale(&dir, res));
        if !inside_cube(&next) {
            return Ok(None);
        }
        match sampler.classify(&next)? {
            None => return Ok(None),
            Some(c) if c == class => last = next,
            Some(_) => {
                let (s, f) = straddle(last, next);
                return bisect_to_boundary(s, f, sampler, res);
            }
        }
    }
    Ok(None)
}

/// Rotation increments over half a turn.
const ROTATION_STEPS: usize = 6;

/// Minimum ratio of the two smallest neighbour variances for a fitted normal.
const PLANARITY: f64 = 4.0;

/// Neighbourhood radii tried widest first, in units of the resolution.
const NORMAL_RADII: [f64; 3] = [6.0, 4.0, 2.5];

/// Largest RMS distance of neighbours from their fitted plane, in units of
/// the resolution, for a wide neighbourhood to count as locally flat.
const FLATNESS: f64 = 0.35;

const MIN_NEIGHBOURS: usize = 5;

/// Least-variance direction of nearby midpoints, oriented like the sample's
/// success-to-failure displacement. The widest neighbourhood that is flat,
/// populated and not collinear wins; the displacement itself is the last resort.
fn estimate_normal(samples: &[BoundarySample], idx: usize, res: f64) -> Unit {
    let here = &samples[idx];
    let displacement = normalize(&sub(&here.outside.to_unit(), &here.inside.to_unit())).unwrap_or(here.normal);
    let centre = here.midpoint.to_unit();
    for (k, radius) in NORMAL_RADII.iter().enumerate() {
        let neighbours: Vec<Unit> = samples
            .iter()
            .map(|s| s.midpoint.to_unit())
            .filter(|m| dist(m, &centre) <= radius * res)
            .collect();
        if neighbours.len() < MIN_NEIGHBOURS {
            continue;
        }
        let Some(fit) = fit_plane(&neighbours) else {
            continue;
        };
        let last = k + 1 == NORMAL_RADII.len();
        if !last && fit.rms > FLATNESS * res {
            continue;
        }
        let mut normal = fit.normal;
        if dot(&normal, &displacement) < 0.0 {
            normal = scale(&normal, -1.0);
        }
        return normal;
    }
    displacement
}

struct PlaneFit {
    normal: Unit,
    /// RMS distance of the points from the fitted plane.
    rms: f64,
}

fn fit_plane(points: &[Unit]) -> Option<PlaneFit> {
    let n = points.len() as f64;
    let mean: Unit = std::array::from_fn(|k| points.iter().map(|m| m[k]).sum::<f64>() / n);
    let mut cov = nalgebra::Matrix3::<f64>::zeros();
    for m in points {
        let d = nalgebra::Vector3::new(m[0] - mean[0], m[1] - mean[1], m[2] - mean[2]);
        cov += d * d.transpose();
    }
    let eig = cov.symmetric_eigen();
    let mut order = [0, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let least = eig.eigenvalues[order[0]].max(0.0);
    // Nearly collinear points leave the least-variance direction undetermined.
    if eig.eigenvalues[order[1]] < PLANARITY * least {
        return None;
    }
    let col = eig.eigenvectors.column(order[0]);
    Some(PlaneFit {
        normal: normalize(&[col[0], col[1], col[2]])?,
        rms: (least / n).sqrt(),
    })
}

/// Fraction of `n` uniform draws classified as success.
pub fn estimate_volume_mc(classifier: &mut dyn Classifier, n: usize, rng: &mut impl Rng) -> Result<f64, ExploreError> {
    let mut hits = 0usize;
    for _ in 0..n {
        if classifier.classify(&random_unit(rng))? == Class::Success {
            hits += 1;
        }
    }
    Ok(hits as f64 / n as f64)
}

/// Fraction of `n` uniform draws lying on the success side of their nearest
/// boundary sample.
pub fn estimate_volume_boundary(boundary: &[BoundarySample], n: usize, rng: &mut impl Rng) -> f64 {
    if boundary.is_empty() {
        return 1.0;
    }
    let mids: Vec<(Unit, Unit)> = boundary.iter().map(|b| (b.midpoint.to_unit(), b.normal)).collect();
    let mut hits = 0usize;
    for _ in 0..n {
        let u = random_unit(rng);
        let (m, normal) = mids
            .iter()
            .min_by(|a, b| dist(&a.0, &u).total_cmp(&dist(&b.0, &u)))
            .expect("non-empty boundary");
        if dot(&sub(&u, m), normal) <= 0.0 {
            hits += 1;
        }
    }
    hits as f64 / n as f64
}

/// Global search, bisection, boundary adherence and a volume estimate.
pub fn explore(classifier: &mut dyn Classifier, config: &ExploreConfig) -> Result<ExplorationReport, ExploreError> {
    config.validate()?;
    let mut rng = rng_from_seed(config.seed);
    let cheap = classifier.is_cheap();
    let mut sampler = Sampler::new(classifier, config.sample_cap);

    let search = find_boundary_pair(&mut sampler, &mut rng)?;
    let (success, failure) = match search {
        GlobalSearch::Pair { success, failure } => (success, failure),
        GlobalSearch::OnlySuccess => {
            return Ok(ExplorationReport {
                boundary: Vec::new(),
                samples_used: sampler.used(),
                volume_estimate: 1.0,
                termination: Termination::NoFailureFound,
                volume_method: VolumeMethod::Trivial,
            })
        }
        GlobalSearch::OnlyFailure => {
            return Ok(ExplorationReport {
                boundary: Vec::new(),
                samples_used: sampler.used(),
                volume_estimate: 0.0,
                termination: Termination::SampleCap,
                volume_method: VolumeMethod::Trivial,
            })
        }
    };

    let (boundary, termination) = match bisect_to_boundary(success, failure, &mut sampler, config.resolution)? {
        Some(seed) => adhere_boundary(seed, &mut sampler, config, &mut rng)?,
        None => (Vec::new(), Termination::SampleCap),
    };
    let samples_used = sampler.used();

    let mut volume_rng = rng_from_seed(config.seed ^ 0x9e37_79b9_7f4a_7c15);
    let (volume_estimate, volume_method) = if cheap {
        (
            estimate_volume_mc(classifier, config.volume_samples, &mut volume_rng)?,
            VolumeMethod::MonteCarlo,
        )
    } else if boundary.is_empty() {
        // Both classes seen but the budget ran out before a boundary sample.
        (0.5, VolumeMethod::Trivial)
    } else {
        (
            estimate_volume_boundary(&boundary, config.volume_samples, &mut volume_rng),
            VolumeMethod::BoundaryNormal,
        )
    };
    Ok(ExplorationReport {
        boundary,
        samples_used,
        volume_estimate,
        termination,
        volume_method,
    })
}

fn inside_cube(u: &Unit) -> bool {
    u.iter().all(|&x| (0.0..=1.0).contains(&x))
}

fn nearest_distance(samples: &[BoundarySample], u: &Unit) -> f64 {
    samples
        .iter()
        .map(|s| dist(&s.midpoint.to_unit(), u))
        .fold(f64::INFINITY, f64::min)
}

fn tangent_basis(n: &Unit) -> (Unit, Unit) {
    let k = (0..DIM)
        .min_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs()))
        .expect("non-empty");
    let mut e = [0.0; DIM];
    e[k] = 1.0;
    let t1 = normalize(&sub(&e, &scale(n, dot(&e, n)))).expect("axis not parallel to normal");
    let t2 = cross(n, &t1);
    (t1, t2)
}

pub(crate) fn dist(a: &Unit, b: &Unit) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn lerp(a: &Unit, b: &Unit, t: f64) -> Unit {
    std::array::from_fn(|k| a[k] + t * (b[k] - a[k]))
}

fn add(a: &Unit, b: &Unit) -> Unit {
    std::array::from_fn(|k| a[k] + b[k])
}

pub(crate) fn sub(a: &Unit, b: &Unit) -> Unit {
    std::array::from_fn(|k| a[k] - b[k])
}

fn scale(a: &Unit, s: f64) -> Unit {
    a.map(|x| x * s)
}

pub(crate) fn dot(a: &Unit, b: &Unit) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cross(a: &Unit, b: &Unit) -> Unit {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn normalize(a: &Unit) -> Option<Unit> {
    let n = dot(a, a).sqrt();
    (n > 1e-12).then(|| scale(a, 1.0 / n))
}

#[cfg(test)]
mod tests {
    use super::analytic::*;
    use super::*;

    #[test]
    fn unit_mapping_round_trips() {
        let p = ParamPoint::from_unit(&[0.0, 0.5, 1.0]);
        assert_eq!(p.theta, [0.001, 0.5, 1.0]);
        let u = p.to_unit();
        assert!(u[0].abs() < 1e-15 && (u[1] - 0.5).abs() < 1e-15 && (u[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sampler_stops_at_cap() {
        let mut c = Constant(Class::Success);
        let mut s = Sampler::new(&mut c, 2);
        assert!(s.classify(&[0.5; 3]).unwrap().is_some());
        assert!(s.classify(&[0.5; 3]).unwrap().is_some());
        assert!(s.classify(&[0.5; 3]).unwrap().is_none());
        assert_eq!(s.used(), 2);
    }

    #[test]
    fn tangent_basis_is_orthonormal() {
        for n in [[1.0, 0.0, 0.0], [0.0, 0.6, 0.8], [0.57735, 0.57735, 0.57735]] {
            let n = normalize(&n).unwrap();
            let (a, b) = tangent_basis(&n);
            assert!(dot(&a, &n).abs() < 1e-12 && dot(&b, &n).abs() < 1e-12 && dot(&a, &b).abs() < 1e-12);
            assert!((dot(&a, &a) - 1.0).abs() < 1e-12 && (dot(&b, &b) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn only_failures_gives_zero_volume() {
        let mut c = Constant(Class::Failure);
        let report = explore(&mut c, &ExploreConfig { sample_cap: 20, ..Default::default() }).unwrap();
        assert_eq!(report.volume_estimate, 0.0);
        assert_eq!(report.termination, Termination::SampleCap);
        assert_eq!(report.samples_used, 20);
    }
}
