//! One pass/fail line per acceptance criterion; exits non-zero if any fail.

mod common;

use std::time::{Duration, Instant};

use common::*;
use rand::Rng;
use vecgame_core::adjust::*;
use vecgame_core::explore::selftest::{run_selftest, Shape};
use vecgame_core::explore::*;
use vecgame_core::features::write_feature_csv;
use vecgame_core::game::*;
use vecgame_core::report::SummaryTable;
use vecgame_core::sim::*;

struct Outcome {
    id: &'static str,
    passed: bool,
    detail: String,
    elapsed: Duration,
}

fn table_grid(method: Method) -> Vec<RaceRecord> {
    Scenario::ALL
        .into_iter()
        .flat_map(|s| grid_search(&RaceConfig::default(), s, method, &GridSpec::uniform(3)).unwrap())
        .collect()
}

/// Checks an adjusted selection: Nash in the adjusted game and both policies secure.
fn adjusted_ok(c1: &CostTensor, d2: &CostMatrix, res: &SelectionResult) -> bool {
    let Some(sol) = &res.solution else {
        return true;
    };
    let d1 = matrix_sum(c1.prime(), &sol.adjustment);
    let e2 = entries(d2);
    sol.minimum.row == res.row_policy
        && oracle_is_nash(&d1, &e2, res.row_policy, res.col_policy)
        && oracle_is_security_pair(&d1, &e2, res.row_policy, res.col_policy, 1e-12)
}

fn nash_and_security(sweep: &[RaceRecord], sweep_time: Duration) -> (Outcome, Vec<SolutionCheck>) {
    let start = Instant::now();
    let options = AdjustOptions::default();
    let mut r = rng(101);
    let mut checks = Vec::new();
    let (mut adjusted, mut violations) = (0, 0);
    for _ in 0..500 {
        let c1 = random_tensor(&mut r, 9, 9, 3);
        let d2 = random_matrix(&mut r, 9, 9);
        let theta: Vec<f64> = (0..3).map(|_| r.random_range(0.001..1.0)).collect();
        let res = select_policy(&c1, &d2, &WeightVector::new(theta).unwrap(), &options).unwrap();
        if let Some(sol) = &res.solution {
            adjusted += 1;
            violations += !adjusted_ok(&c1, &d2, &res) as usize;
            checks.push(inspect_solution(c1.prime(), &d2, sol, &options).unwrap());
        }
    }
    let mut race_rounds = 0;
    for record in sweep {
        let theta = WeightVector::new(record.config.attacker_weights.clone()).unwrap();
        let defender = WeightVector::new(record.config.defender_weights.clone()).unwrap();
        for round in record.rounds.iter().filter(|r| r.method == RoundMethod::Adjusted) {
            race_rounds += 1;
            let d2 = scalarize(&round.defender_costs, &defender).unwrap();
            let res = select_policy(&round.attacker_costs, &d2, &theta, &record.config.adjust).unwrap();
            let replayed = res.row_policy == round.choice.row && res.col_policy == round.choice.col;
            violations += !(replayed && res.solution.is_some() && adjusted_ok(&round.attacker_costs, &d2, &res)) as usize;
            if let Some(sol) = &res.solution {
                checks.push(inspect_solution(round.attacker_costs.prime(), &d2, sol, &record.config.adjust).unwrap());
            }
        }
    }
    let elapsed = start.elapsed() + sweep_time;
    let outcome = Outcome {
        id: "nash_and_security",
        passed: violations == 0 && adjusted >= 1 && race_rounds >= 1 && elapsed < Duration::from_secs(300),
        detail: format!(
            "{adjusted} adjusted random 9x9x3 games, {race_rounds} adjusted rounds over {} races, {violations} violations",
            sweep.len()
        ),
        elapsed,
    };
    (outcome, checks)
}

fn feasibility(checks: &mut Vec<SolutionCheck>) -> Outcome {
    let start = Instant::now();
    let options = AdjustOptions::default();
    let mut r = rng(102);
    let (mut pairs, mut feasible, mut disagreements) = (0, 0, 0);
    for _ in 0..500 {
        let d2 = random_matrix(&mut r, 9, 9);
        let c11 = random_matrix(&mut r, 9, 9);
        for row in 0..9 {
            for col in 0..9 {
                pairs += 1;
                let screened = check_feasibility(&d2, row, col);
                let solved = solve_adjustment(&c11, &d2, row, col, &options).unwrap();
                let valid = solved.solution().is_some_and(|s| {
                    let check = inspect_solution(&c11, &d2, s, &options).unwrap();
                    let ok = check.potential_ok && check.minimum_ok;
                    checks.push(check);
                    ok
                });
                feasible += screened as usize;
                disagreements += (screened != valid) as usize;
            }
        }
    }
    Outcome {
        id: "feasibility_iff_solution",
        passed: disagreements == 0,
        detail: format!("{pairs} pairs, {feasible} feasible, {disagreements} disagreements"),
        elapsed: start.elapsed(),
    }
}

fn residuals(checks: &[SolutionCheck]) -> Outcome {
    let start = Instant::now();
    let accepted: Vec<&SolutionCheck> = checks.iter().filter(|c| c.potential_ok && c.minimum_ok).collect();
    let worst = accepted.iter().map(|c| c.potential_residual).fold(0.0, f64::max);
    let phi = accepted.iter().map(|c| c.minimum_value.abs()).fold(0.0, f64::max);
    Outcome {
        id: "residuals",
        passed: !accepted.is_empty() && worst <= 1e-6 && phi <= 1e-8,
        detail: format!(
            "{} accepted solutions, max residual {worst:.2e}, max |phi(r,c)| {phi:.2e}",
            accepted.len()
        ),
        elapsed: start.elapsed(),
    }
}

fn policy_sets() -> Outcome {
    let start = Instant::now();
    let mut r = rng(104);
    let mut mismatches = 0;
    for k in 0..1000 {
        let (n, m, g) = (r.random_range(1..=12), r.random_range(1..=12), r.random_range(1..=4));
        let c = if k % 2 == 0 { random_tensor(&mut r, n, m, g) } else { tied_tensor(&mut r, n, m, g) };
        let sigma = r.random_range(0..m);
        let got = |s: PolicySet| s.iter().collect::<std::collections::BTreeSet<_>>();
        mismatches += (got(pareto_set(&c, sigma).unwrap()) != oracle_pareto(&c, sigma)) as usize;
        mismatches += (got(worst_set(&c, sigma).unwrap()) != oracle_worst(&c, sigma)) as usize;
        mismatches += (got(moderate_set(&c, sigma).unwrap()) != oracle_moderate(&c, sigma)) as usize;
    }
    let elapsed = start.elapsed();
    Outcome {
        id: "policy_sets",
        passed: mismatches == 0 && elapsed < Duration::from_secs(60),
        detail: format!("1000 instances up to 12x12x4, {mismatches} mismatches"),
        elapsed,
    }
}

fn desk_table(scalar: &[RaceRecord], vector: &[RaceRecord], elapsed: Duration) -> Outcome {
    let mut all = scalar.to_vec();
    all.extend_from_slice(vector);
    let table = SummaryTable::from_records(&all);
    let (s, v) = (table.column(Method::Scalar).unwrap(), table.column(Method::Vector).unwrap());
    Outcome {
        id: "desk_table",
        passed: v.passes > s.passes
            && v.out_of_bounds < s.out_of_bounds
            && v.average_min_distance > s.average_min_distance
            && elapsed < Duration::from_secs(900),
        detail: format!(
            "{} races per method; passes {} vs {}, out of bounds {} vs {}, min distance {:.2} vs {:.2} (scalar vs vector)",
            s.races, s.passes, v.passes, s.out_of_bounds, v.out_of_bounds, s.average_min_distance, v.average_min_distance
        ),
        elapsed,
    }
}

fn inside_edge_volume() -> Outcome {
    let start = Instant::now();
    let config = ExploreConfig {
        sample_cap: 100,
        ..ExploreConfig::default()
    };
    let volume = |method| {
        let mut c = RaceClassifier::new(RaceConfig::default(), Scenario::InsideEdge, method, Metric::Passes);
        explore(&mut c, &config).unwrap().volume_estimate
    };
    let (s, v) = (volume(Method::Scalar), volume(Method::Vector));
    Outcome {
        id: "inside_edge_passes",
        passed: v - s >= 0.15,
        detail: format!("scalar {s:.3}, vector {v:.3}, difference {:.3}", v - s),
        elapsed: start.elapsed(),
    }
}

fn explorer() -> Outcome {
    let start = Instant::now();
    let config = ExploreConfig::default();
    let mut failed = Vec::new();
    let mut details = Vec::new();
    for shape in Shape::ALL {
        let report = run_selftest(shape, &config).unwrap();
        for check in report.checks.iter().filter(|c| !c.passed) {
            failed.push(format!("{}:{}", shape.name(), check.name));
        }
        details.push(format!("{} volume {:.4}", shape.name(), report.report.volume_estimate));
    }
    Outcome {
        id: "explorer_selftests",
        passed: failed.is_empty(),
        detail: format!("{}; failed [{}]", details.join(", "), failed.join(", ")),
        elapsed: start.elapsed(),
    }
}

fn closed_form_error() -> f64 {
    let p = VehicleParams::default();
    let s0 = |v, heading| VehicleState {
        x: 3.0,
        y: -1.5,
        v,
        heading,
        slip: 0.0,
    };
    let mut worst: f64 = 0.0;
    for &(v0, accel) in &[(4.0, 0.0), (2.0, 1.5), (5.5, -2.0)] {
        let (h, dt) = (0.7, 0.05);
        let mut s = s0(v0, h);
        for k in 1..=20 {
            s = step_bicycle(&s, &ActionSpec { accel, steer: 0.0, index: 5 }, dt, &p);
            let t = k as f64 * dt;
            let dist = v0 * t + 0.5 * accel * t * t;
            let scale = dist.abs().max(1.0);
            worst = worst
                .max((s.x - 3.0 - dist * h.cos()).abs() / scale)
                .max((s.y + 1.5 - dist * h.sin()).abs() / scale)
                .max((s.v - v0 - accel * t).abs() / (v0 + accel * t));
        }
    }
    for &steer in &[0.2f64, -0.35] {
        let v = 4.0;
        let beta = (p.l_rear / (p.l_front + p.l_rear) * steer.tan()).atan();
        let omega = v * beta.sin() / p.l_rear;
        let radius = v / omega;
        let psi0 = 0.3 + beta;
        let mut s = s0(v, 0.3);
        for k in 1..=50 {
            s = step_bicycle(&s, &ActionSpec { accel: 0.0, steer, index: 4 }, 0.1, &p);
            let t = k as f64 * 0.1;
            let x = 3.0 + radius * ((psi0 + omega * t).sin() - psi0.sin());
            let y = -1.5 + radius * (psi0.cos() - (psi0 + omega * t).cos());
            worst = worst.max((s.x - x).abs().max((s.y - y).abs()) / radius.abs());
        }
    }
    worst
}

fn bicycle() -> Outcome {
    let start = Instant::now();
    let closed = closed_form_error();
    let physics = Physics::default();
    let (mut worst, mut states, mut seams) = (0.0f64, 0, 0);
    for (a, d) in refinement_states() {
        let r = refinement(&a, &d, &physics);
        if r.seam {
            seams += 1;
            continue;
        }
        states += 1;
        worst = r.change.iter().fold(worst, |w, &c| w.max(c));
    }
    Outcome {
        id: "bicycle",
        passed: closed <= 1e-3 && worst < 0.05,
        detail: format!(
            "closed-form relative error {closed:.2e}; dt halving max change {:.2}% over {states} states ({seams} seam states skipped)",
            100.0 * worst
        ),
        elapsed: start.elapsed(),
    }
}

fn determinism() -> Outcome {
    let start = Instant::now();
    let run = || {
        let records = grid_search(&RaceConfig::default(), Scenario::InsideEdge, Method::Vector, &GridSpec::uniform(2)).unwrap();
        let mut csv = Vec::new();
        write_feature_csv(&records, &mut csv).unwrap();
        SummaryTable::from_records(&records).write_csv(&mut csv).unwrap();
        let mut c = vecgame_core::explore::analytic::Sphere {
            center: [0.5; 3],
            radius: 0.3,
        };
        let report = explore(&mut c, &ExploreConfig::default()).unwrap();
        let json = serde_json::to_vec(&(records, report)).unwrap();
        (csv, json)
    };
    let (a, b) = (run(), run());
    Outcome {
        id: "determinism",
        passed: a == b,
        detail: format!("{} CSV bytes, {} JSON bytes compared", a.0.len(), a.1.len()),
        elapsed: start.elapsed(),
    }
}

fn main() {
    let mut outcomes = Vec::new();

    let start = Instant::now();
    let scalar = table_grid(Method::Scalar);
    let scalar_time = start.elapsed();
    let start = Instant::now();
    let vector = table_grid(Method::Vector);
    let vector_time = start.elapsed();

    let (first, mut checks) = nash_and_security(&vector, vector_time);
    outcomes.push(first);
    outcomes.push(feasibility(&mut checks));
    outcomes.push(residuals(&checks));
    outcomes.push(policy_sets());
    outcomes.push(desk_table(&scalar, &vector, scalar_time + vector_time));
    outcomes.push(inside_edge_volume());
    outcomes.push(explorer());
    outcomes.push(bicycle());
    outcomes.push(determinism());

    for o in &outcomes {
        println!(
            "{} {:<26} {:>8.2}s  {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.id,
            o.elapsed.as_secs_f64(),
            o.detail
        );
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
