use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ParamPoint, DIM};
use crate::sim::{run_race, Method, RaceConfig, RaceRecord, Scenario};
use crate::ConfigError;

/// Interval counts per weight; races run at interval midpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub intervals: [usize; DIM],
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { intervals: [5; DIM] }
    }
}

impl GridSpec {
    pub fn uniform(k: usize) -> Self {
        Self { intervals: [k; DIM] }
    }

    pub fn len(&self) -> usize {
        self.intervals.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.intervals.contains(&0) {
            return Err(ConfigError::new("grid.intervals", "every dimension needs at least one interval"));
        }
        Ok(())
    }
}

/// Grid points in lexicographic order, last weight varying fastest.
pub fn grid_points(spec: &GridSpec) -> Vec<ParamPoint> {
    let axis = |d: usize| -> Vec<f64> {
        let k = spec.intervals[d];
        (0..k).map(|i| (i as f64 + 0.5) / k as f64).collect()
    };
    let (a, b, c) = (axis(0), axis(1), axis(2));
    let mut out = Vec::with_capacity(spec.len());
    for &x in &a {
        for &y in &b {
            for &z in &c {
                out.push(ParamPoint::from_unit(&[x, y, z]));
            }
        }
    }
    out
}

/// One config per grid point.
pub fn grid_configs(base: &RaceConfig, scenario: Scenario, method: Method, spec: &GridSpec) -> Vec<RaceConfig> {
    grid_points(spec)
        .into_iter()
        .map(|p| RaceConfig {
            scenario,
            method,
            attacker_weights: p.theta.to_vec(),
            ..base.clone()
        })
        .collect()
}

/// Runs every grid point in parallel; results keep grid order.
pub fn grid_search(
    base: &RaceConfig,
    scenario: Scenario,
    method: Method,
    spec: &GridSpec,
) -> Result<Vec<RaceRecord>, ConfigError> {
    spec.validate()?;
    grid_configs(base, scenario, method, spec).par_iter().map(run_race).collect()
}
