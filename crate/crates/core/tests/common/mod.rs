//! Random instance generators and brute-force oracles written independently
//! of the library's implementations.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vecgame_core::game::{CostMatrix, CostTensor};
use vecgame_core::sim::*;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Continuous entries in `[-5, 5)`.
pub fn random_matrix(rng: &mut impl Rng, n: usize, m: usize) -> CostMatrix {
    CostMatrix::from_fn(n, m, |_, _| rng.random_range(-5.0..5.0)).unwrap()
}

/// Small integers, so ties are common.
pub fn tied_matrix(rng: &mut impl Rng, n: usize, m: usize) -> CostMatrix {
    CostMatrix::from_fn(n, m, |_, _| rng.random_range(0..4) as f64).unwrap()
}

pub fn random_tensor(rng: &mut impl Rng, n: usize, m: usize, g: usize) -> CostTensor {
    CostTensor::new((0..g).map(|_| random_matrix(rng, n, m)).collect()).unwrap()
}

pub fn tied_tensor(rng: &mut impl Rng, n: usize, m: usize, g: usize) -> CostTensor {
    CostTensor::new((0..g).map(|_| tied_matrix(rng, n, m)).collect()).unwrap()
}

pub fn entries(m: &CostMatrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j)).collect()).collect()
}

pub fn oracle_scalarize(c: &CostTensor, w: &[f64]) -> Vec<Vec<f64>> {
    let (n, m) = c.shape();
    let mut out = vec![vec![0.0; m]; n];
    for (h, wh) in w.iter().enumerate() {
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell += wh * c.objective(h).get(i, j);
            }
        }
    }
    out
}

/// First row whose worst column is smallest.
pub fn oracle_security_row(d: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, row) in d.iter().enumerate() {
        let mut worst = f64::NEG_INFINITY;
        for &v in row {
            if v > worst {
                worst = v;
            }
        }
        if worst < best.1 {
            best = (i, worst);
        }
    }
    best
}

pub fn oracle_security_col(d: &[Vec<f64>]) -> (usize, f64) {
    let m = d[0].len();
    let mut best = (0, f64::INFINITY);
    for j in 0..m {
        let worst = d.iter().map(|row| row[j]).fold(f64::NEG_INFINITY, f64::max);
        if worst < best.1 {
            best = (j, worst);
        }
    }
    best
}

fn column_outcomes(c: &CostTensor, sigma: usize) -> Vec<Vec<f64>> {
    let (n, _) = c.shape();
    (0..n)
        .map(|i| (0..c.depth()).map(|h| c.objective(h).get(i, sigma)).collect())
        .collect()
}

pub fn oracle_pareto(c: &CostTensor, sigma: usize) -> BTreeSet<usize> {
    let out = column_outcomes(c, sigma);
    let mut set = BTreeSet::new();
    'candidates: for a in 0..out.len() {
        for b in 0..out.len() {
            if a == b {
                continue;
            }
            let no_worse = (0..out[a].len()).all(|h| out[b][h] <= out[a][h]);
            let better = (0..out[a].len()).any(|h| out[b][h] < out[a][h]);
            if no_worse && better {
                continue 'candidates;
            }
        }
        set.insert(a);
    }
    set
}

pub fn oracle_worst(c: &CostTensor, sigma: usize) -> BTreeSet<usize> {
    let out = column_outcomes(c, sigma);
    let mut set = BTreeSet::new();
    for h in 0..c.depth() {
        let top = out.iter().map(|o| o[h]).fold(f64::NEG_INFINITY, f64::max);
        for (i, o) in out.iter().enumerate() {
            if o[h] == top {
                set.insert(i);
            }
        }
    }
    set
}

pub fn oracle_moderate(c: &CostTensor, sigma: usize) -> BTreeSet<usize> {
    let worst = oracle_worst(c, sigma);
    oracle_pareto(c, sigma).difference(&worst).copied().collect()
}

/// Every unilateral deviation enumerated.
pub fn oracle_is_nash(d1: &[Vec<f64>], d2: &[Vec<f64>], row: usize, col: usize) -> bool {
    for (i, r) in d1.iter().enumerate() {
        if i != row && r[col] < d1[row][col] {
            return false;
        }
    }
    for j in 0..d2[row].len() {
        if j != col && d2[row][j] < d2[row][col] {
            return false;
        }
    }
    true
}

/// Whether `row` and `col` attain the min-max values of their players.
pub fn oracle_is_security_pair(d1: &[Vec<f64>], d2: &[Vec<f64>], row: usize, col: usize, tol: f64) -> bool {
    let (_, v1) = oracle_security_row(d1);
    let (_, v2) = oracle_security_col(d2);
    let row_worst = d1[row].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let col_worst = d2.iter().map(|r| r[col]).fold(f64::NEG_INFINITY, f64::max);
    (row_worst - v1).abs() <= tol && (col_worst - v2).abs() <= tol
}

pub fn matrix_sum(a: &CostMatrix, b: &CostMatrix) -> Vec<Vec<f64>> {
    (0..a.rows())
        .map(|i| (0..a.cols()).map(|j| a.get(i, j) + b.get(i, j)).collect())
        .collect()
}

/// Cost magnitude below which refinement changes are measured absolutely.
pub const REFINEMENT_FLOOR: f64 = 0.1;

pub struct Refinement {
    /// Per objective, `|C(dt) - C(dt/2)| / max(|C(dt/2)|, REFINEMENT_FLOOR)` in Frobenius norm.
    pub change: [f64; OBJECTIVES],
    /// Some trajectory pair crosses the half-lap seam of the progress cost.
    pub seam: bool,
}

/// Cost tensors of both players' trajectory sets at `dt` and `dt / 2`.
pub fn refinement(attacker: &VehicleState, defender: &VehicleState, physics: &Physics) -> Refinement {
    let track = physics.track;
    let tensors = |dt: f64| {
        let motion = MotionParams { dt, ..physics.motion };
        let a = generate_trajectories(attacker, &motion, &physics.attacker);
        let d = generate_trajectories(defender, &motion, &physics.defender);
        let (c1, _) = build_cost_tensors(&a, &d, dt, &track, &CostParams::default());
        (c1, a, d)
    };
    let (coarse, _, _) = tensors(physics.motion.dt);
    let (fine, a, d) = tensors(physics.motion.dt / 2.0);
    let mut change = [0.0; OBJECTIVES];
    for (h, out) in change.iter_mut().enumerate() {
        let (mut diff, mut norm) = (0.0, 0.0);
        for i in 0..9 {
            for j in 0..9 {
                let (x, y) = (coarse.objective(h).get(i, j), fine.objective(h).get(i, j));
                diff += (x - y) * (x - y);
                norm += y * y;
            }
        }
        *out = diff.sqrt() / norm.sqrt().max(REFINEMENT_FLOOR);
    }
    let seam = a.iter().any(|ta| {
        d.iter().any(|td| {
            let gaps: Vec<f64> = ta
                .points
                .iter()
                .zip(&td.points)
                .map(|(p, q)| wrap_angle(track.angle_of(q.position()) - track.angle_of(p.position())))
                .collect();
            gaps.windows(2).any(|w| (w[1] - w[0]).abs() > std::f64::consts::PI)
        })
    });
    Refinement { change, seam }
}

/// Spawn states of every scenario plus every round state of the default races.
pub fn refinement_states() -> Vec<(VehicleState, VehicleState)> {
    let physics = Physics::default();
    let track = physics.track;
    let mut states = Vec::new();
    for scenario in Scenario::ALL {
        let spawn = scenario.default_spawn();
        states.push((
            track.spawn(-spawn.gap / track.centerline_radius(), spawn.lateral, spawn.attacker_speed),
            track.spawn(0.0, 0.0, spawn.defender_speed),
        ));
        for method in Method::ALL {
            let record = run_race(&RaceConfig {
                scenario,
                method,
                ..RaceConfig::default()
            })
            .unwrap();
            states.extend(record.rounds.iter().map(|r| (r.attacker, r.defender)));
        }
    }
    states
}
