//! Cost adjustment for vector-cost games.
//!
//! Player 1's prime objective `C11` is perturbed by a minimum-norm matrix `E`
//! so that `(C11 + E, D2)` is an exact potential game whose potential has a
//! unique global minimum at a chosen `(r, c)`. Policy selection tries every
//! moderate Pareto row as `r` and falls back to scalarization when no
//! candidate survives verification.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::GameError;
use crate::game::{
    moderate_set_within, scalarize, security_policy_col, security_policy_row, CostMatrix, CostTensor, PolicyPair,
    WeightVector,
};
use crate::qp::{BoundedQp, QpError};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdjustOptions {
    /// Minimum gap between the potential's minimum and every other entry.
    pub epsilon: f64,
    /// Tolerance on pairwise potential-constraint residuals.
    pub residual_tol: f64,
    /// Tolerance on the potential's value at the designated minimum.
    pub minimum_tol: f64,
    pub max_iterations: usize,
    /// Cost differences up to this size are ties when forming candidate sets.
    pub tie_tolerance: f64,
}

impl Default for AdjustOptions {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            residual_tol: 1e-6,
            minimum_tol: 1e-8,
            max_iterations: 10_000,
            tie_tolerance: 0.0,
        }
    }
}

/// All pairwise differences along columns (`x_ij - x_kj`, `i < k`) and rows (`x_ij - x_ik`, `j < k`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairwiseDiffs {
    /// `t x m`, one row per row pair.
    pub col_diffs: Vec<Vec<f64>>,
    /// `n x s`, one column per column pair.
    pub row_diffs: Vec<Vec<f64>>,
    pub row_pairs: Vec<(usize, usize)>,
    pub col_pairs: Vec<(usize, usize)>,
}

fn index_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |k| (i, k))).collect()
}

pub fn pairwise_diffs(x: &CostMatrix) -> PairwiseDiffs {
    let (n, m) = x.shape();
    let row_pairs = index_pairs(n);
    let col_pairs = index_pairs(m);
    let col_diffs = row_pairs
        .iter()
        .map(|&(i, k)| (0..m).map(|j| x.get(i, j) - x.get(k, j)).collect())
        .collect();
    let row_diffs = (0..n)
        .map(|i| col_pairs.iter().map(|&(j, k)| x.get(i, j) - x.get(i, k)).collect())
        .collect();
    PairwiseDiffs {
        col_diffs,
        row_diffs,
        row_pairs,
        col_pairs,
    }
}

/// Largest absolute mismatch between the pairwise differences of two matrices.
fn pairwise_mismatch(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Necessary condition for a potential minimum at `(r, c)`: `D2(r, c)` must
/// undercut every other entry of row `r` by at least `margin`.
pub fn check_feasibility_with_margin(d2: &CostMatrix, r: usize, c: usize, margin: f64) -> bool {
    let anchor = d2.get(r, c);
    d2.row(r)
        .iter()
        .enumerate()
        .all(|(j, &v)| j == c || v - anchor >= margin)
}

/// [`check_feasibility_with_margin`] at the default potential gap.
pub fn check_feasibility(d2: &CostMatrix, r: usize, c: usize) -> bool {
    check_feasibility_with_margin(d2, r, c, AdjustOptions::default().epsilon)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialSolution {
    pub adjustment: CostMatrix,
    pub potential: CostMatrix,
    pub minimum: PolicyPair,
    /// Squared Frobenius norm of the adjustment.
    pub objective_value: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Infeasibility {
    /// Row `r` of `D2` does not have its strict minimum at `c`.
    RowCondition,
    NonConvergence,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolveOutcome {
    Solved(PotentialSolution),
    Infeasible(Infeasibility),
}

impl SolveOutcome {
    pub fn solution(&self) -> Option<&PotentialSolution> {
        match self {
            SolveOutcome::Solved(s) => Some(s),
            SolveOutcome::Infeasible(_) => None,
        }
    }

    pub fn into_solution(self) -> Option<PotentialSolution> {
        match self {
            SolveOutcome::Solved(s) => Some(s),
            SolveOutcome::Infeasible(_) => None,
        }
    }
}

/// Minimum-norm `E` making `(C11 + E, D2)` an exact potential game with a
/// unique potential minimum (value 0) at `(r, c)`.
///
/// The row constraints force `phi = D2 + k 1'` and the column constraints
/// force `E = phi - C11 - 1 a'` for row offsets `k` and column offsets `a`,
/// with `k_r = -D2(r, c)`. What remains is a least-squares problem in
/// `(k, a)` with lower bounds `k_i >= eps - min_j D2(i, j)`.
pub fn solve_adjustment(
    c11: &CostMatrix,
    d2: &CostMatrix,
    r: usize,
    c: usize,
    options: &AdjustOptions,
) -> Result<SolveOutcome, GameError> {
    if c11.shape() != d2.shape() {
        return Err(GameError::Dimension(format!("{:?} vs {:?}", c11.shape(), d2.shape())));
    }
    let (n, m) = d2.shape();
    if r >= n || c >= m {
        return Err(GameError::Index(format!("({r}, {c}) in a {n}x{m} game")));
    }
    if !check_feasibility_with_margin(d2, r, c, options.epsilon) {
        return Ok(SolveOutcome::Infeasible(Infeasibility::RowCondition));
    }

    // Variable layout: k_i for i != r, then a_j for every column.
    let k_index = |i: usize| if i < r { i } else { i - 1 };
    let dim = (n - 1) + m;
    let k_r = -d2.get(r, c);

    // E(i, j) = D2(i, j) - C11(i, j) + k_i - a_j  =  b + A x
    let mut a_mat = DMatrix::<f64>::zeros(n * m, dim);
    let mut b = DVector::<f64>::zeros(n * m);
    for i in 0..n {
        for j in 0..m {
            let e = i * m + j;
            b[e] = d2.get(i, j) - c11.get(i, j);
            if i == r {
                b[e] += k_r;
            } else {
                a_mat[(e, k_index(i))] = 1.0;
            }
            a_mat[(e, n - 1 + j)] = -1.0;
        }
    }
    let mut lower = vec![f64::NEG_INFINITY; dim];
    for i in (0..n).filter(|&i| i != r) {
        let row_min = d2.row(i).iter().copied().fold(f64::INFINITY, f64::min);
        lower[k_index(i)] = options.epsilon - row_min;
    }
    let qp = BoundedQp {
        hessian: 2.0 * a_mat.transpose() * &a_mat,
        linear: 2.0 * a_mat.transpose() * &b,
        lower,
    };
    let sol = match qp.solve(options.max_iterations) {
        Ok(s) => s,
        Err(QpError::IterationCap(_) | QpError::NotPositiveDefinite) => {
            return Ok(SolveOutcome::Infeasible(Infeasibility::NonConvergence))
        }
    };
    if sol.kkt_residual > options.residual_tol {
        return Ok(SolveOutcome::Infeasible(Infeasibility::NonConvergence));
    }

    let offset = |i: usize| if i == r { k_r } else { sol.x[k_index(i)] };
    let potential = CostMatrix::from_fn(n, m, |i, j| if (i, j) == (r, c) { 0.0 } else { d2.get(i, j) + offset(i) })?;
    let adjustment = CostMatrix::from_fn(n, m, |i, j| {
        d2.get(i, j) - c11.get(i, j) + offset(i) - sol.x[n - 1 + j]
    })?;
    let objective_value = adjustment.frobenius_sq();
    Ok(SolveOutcome::Solved(PotentialSolution {
        adjustment,
        potential,
        minimum: PolicyPair::new(r, c),
        objective_value,
        kkt_residual: sol.kkt_residual,
        iterations: sol.iterations,
    }))
}

/// Detailed outcome of [`verify_solution`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionCheck {
    /// Worst pairwise-difference mismatch over both potential constraints.
    pub potential_residual: f64,
    pub minimum_value: f64,
    /// Smallest potential value away from the designated minimum.
    pub runner_up: f64,
    /// Security row of the adjusted prime costs (zero-based).
    pub adjusted_security_row: usize,
    pub potential_ok: bool,
    pub minimum_ok: bool,
    pub security_ok: bool,
}

impl SolutionCheck {
    pub fn accepted(&self) -> bool {
        self.potential_ok && self.minimum_ok && self.security_ok
    }
}

pub fn inspect_solution(
    c11: &CostMatrix,
    d2: &CostMatrix,
    sol: &PotentialSolution,
    options: &AdjustOptions,
) -> Result<SolutionCheck, GameError> {
    let adjusted = c11.add(&sol.adjustment)?;
    if sol.potential.shape() != d2.shape() {
        return Err(GameError::Dimension("potential shape differs from D2".into()));
    }
    let phi = pairwise_diffs(&sol.potential);
    let col_res = pairwise_mismatch(&pairwise_diffs(&adjusted).col_diffs, &phi.col_diffs);
    let row_res = pairwise_mismatch(&pairwise_diffs(d2).row_diffs, &phi.row_diffs);
    let potential_residual = col_res.max(row_res);

    let PolicyPair { row: r, col: c } = sol.minimum;
    let minimum_value = sol.potential.get(r, c);
    let (n, m) = sol.potential.shape();
    let runner_up = (0..n)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .filter(|&p| p != (r, c))
        .map(|(i, j)| sol.potential.get(i, j))
        .fold(f64::INFINITY, f64::min);
    let (adjusted_security_row, _) = security_policy_row(&adjusted);

    Ok(SolutionCheck {
        potential_residual,
        minimum_value,
        runner_up,
        adjusted_security_row,
        potential_ok: potential_residual <= options.residual_tol,
        minimum_ok: minimum_value.abs() <= options.minimum_tol
            && (runner_up.is_infinite() || runner_up >= options.epsilon - options.minimum_tol),
        security_ok: adjusted_security_row == r,
    })
}

/// Accepts a solution only if the potential constraints hold, `(r, c)` is the
/// unique zero minimum, and the security row of `C11 + E` is exactly `r`.
pub fn verify_solution(c11: &CostMatrix, d2: &CostMatrix, sol: &PotentialSolution, options: &AdjustOptions) -> bool {
    inspect_solution(c11, d2, sol, options).is_ok_and(|check| check.accepted())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMethod {
    Adjusted,
    ScalarFallback,
}

/// One candidate solve inside [`select_policy`], suitable for NDJSON dumps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveLog {
    pub minimum: PolicyPair,
    pub feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub infeasibility: Option<Infeasibility>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solution: Option<PotentialSolution>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<SolutionCheck>,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    #[serde(with = "crate::game::one_based")]
    pub row_policy: usize,
    #[serde(with = "crate::game::one_based")]
    pub col_policy: usize,
    pub method: SelectionMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solution: Option<PotentialSolution>,
    pub candidates_tried: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub solves: Vec<SolveLog>,
}

/// Policy selection from adjusted costs.
///
/// Player 2 is assumed to play its security column of `D2`. Each moderate
/// Pareto row of `C1` in that column is tried as the potential minimum; the
/// verified adjustment with the smallest norm wins (first found on ties).
pub fn select_policy(
    c1: &CostTensor,
    d2: &CostMatrix,
    theta1: &WeightVector,
    options: &AdjustOptions,
) -> Result<SelectionResult, GameError> {
    select_policy_inner(c1, d2, theta1, options, false)
}

/// [`select_policy`] that also records every candidate solve.
pub fn select_policy_traced(
    c1: &CostTensor,
    d2: &CostMatrix,
    theta1: &WeightVector,
    options: &AdjustOptions,
) -> Result<SelectionResult, GameError> {
    select_policy_inner(c1, d2, theta1, options, true)
}

fn select_policy_inner(
    c1: &CostTensor,
    d2: &CostMatrix,
    theta1: &WeightVector,
    options: &AdjustOptions,
    trace: bool,
) -> Result<SelectionResult, GameError> {
    if c1.shape() != d2.shape() {
        return Err(GameError::Dimension(format!("{:?} vs {:?}", c1.shape(), d2.shape())));
    }
    let fallback_costs = scalarize(c1, theta1)?;
    let (sigma, _) = security_policy_col(d2);
    let candidates = moderate_set_within(c1, sigma, options.tie_tolerance)?;
    let prime = c1.prime();

    let mut best: Option<PotentialSolution> = None;
    let mut solves = Vec::new();
    for r in candidates.iter() {
        let outcome = solve_adjustment(prime, d2, r, sigma, options)?;
        let (accepted, check) = match outcome.solution() {
            Some(sol) => {
                let check = inspect_solution(prime, d2, sol, options)?;
                (check.accepted(), Some(check))
            }
            None => (false, None),
        };
        if accepted {
            let sol = outcome.solution().expect("accepted implies solved");
            if best.as_ref().is_none_or(|b| sol.objective_value < b.objective_value) {
                best = Some(sol.clone());
            }
        }
        if trace {
            solves.push(SolveLog {
                minimum: PolicyPair::new(r, sigma),
                feasible: !matches!(outcome, SolveOutcome::Infeasible(Infeasibility::RowCondition)),
                infeasibility: match outcome {
                    SolveOutcome::Infeasible(why) => Some(why),
                    SolveOutcome::Solved(_) => None,
                },
                solution: outcome.into_solution(),
                check,
                accepted,
            });
        }
    }

    let (row_policy, method) = match &best {
        Some(sol) => (security_policy_row(&prime.add(&sol.adjustment)?).0, SelectionMethod::Adjusted),
        None => (security_policy_row(&fallback_costs).0, SelectionMethod::ScalarFallback),
    };
    Ok(SelectionResult {
        row_policy,
        col_policy: sigma,
        method,
        solution: best,
        candidates_tried: candidates.len(),
        solves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::is_nash;

    fn m(rows: &[&[f64]]) -> CostMatrix {
        CostMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn pairwise_diffs_by_hand() {
        let d = pairwise_diffs(&m(&[&[1.0, 2.0], &[3.0, 4.0]]));
        assert_eq!(d.col_diffs, vec![vec![-2.0, -2.0]]);
        assert_eq!(d.row_diffs, vec![vec![-1.0], vec![-1.0]]);
        assert_eq!(d.row_pairs, vec![(0, 1)]);
        assert_eq!(d.col_pairs, vec![(0, 1)]);
    }

    #[test]
    fn pairwise_diffs_constant_and_shapes() {
        let d = pairwise_diffs(&CostMatrix::from_fn(3, 3, |_, _| 4.2).unwrap());
        assert!(d.col_diffs.iter().flatten().all(|v| *v == 0.0));
        assert!(d.row_diffs.iter().flatten().all(|v| *v == 0.0));
        let d = pairwise_diffs(&CostMatrix::from_fn(3, 4, |i, j| (i * 7 + j * 3) as f64).unwrap());
        assert_eq!(d.col_diffs.len(), 3);
        assert_eq!(d.col_diffs[0].len(), 4);
        assert_eq!(d.row_diffs.len(), 3);
        assert_eq!(d.row_diffs[0].len(), 6);
        assert_eq!(d.row_pairs, vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn feasibility_examples() {
        let d2 = m(&[&[3.0, 1.0, 2.0], &[1.0, 2.0, 3.0]]);
        assert!(check_feasibility(&d2, 0, 1));
        assert!(!check_feasibility(&d2, 1, 1));
        assert!(check_feasibility(&d2, 1, 0));
        // A tie is not a strict minimum.
        assert!(!check_feasibility(&m(&[&[1.0, 1.0]]), 0, 0));
    }

    #[test]
    fn no_adjustment_needed_for_existing_potential_game() {
        // phi has a unique zero minimum at (0, 0); C11 and D2 both equal phi.
        let phi = m(&[&[0.0, 1.0, 2.0], &[1.5, 2.0, 3.0], &[1.0, 4.0, 2.5]]);
        let out = solve_adjustment(&phi, &phi, 0, 0, &AdjustOptions::default()).unwrap();
        let sol = out.solution().expect("feasible");
        assert!(sol.objective_value < 1e-20, "{}", sol.objective_value);
        assert!(verify_solution(&phi, &phi, sol, &AdjustOptions::default()));
    }

    #[test]
    fn row_condition_violation_is_infeasible() {
        let d2 = m(&[&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0]]);
        let c11 = m(&[&[0.0; 3], &[0.0; 3]]);
        let out = solve_adjustment(&c11, &d2, 0, 1, &AdjustOptions::default()).unwrap();
        assert_eq!(out, SolveOutcome::Infeasible(Infeasibility::RowCondition));
    }

    #[test]
    fn perturbed_minimum_is_rejected() {
        let d2 = m(&[&[0.0, 1.0], &[2.0, 0.0]]);
        let c11 = m(&[&[0.3, 0.9], &[0.1, 0.7]]);
        let opts = AdjustOptions::default();
        let mut sol = solve_adjustment(&c11, &d2, 0, 0, &opts).unwrap().into_solution().unwrap();
        assert!(inspect_solution(&c11, &d2, &sol, &opts).unwrap().potential_ok);
        sol.potential.set(0, 0, opts.epsilon);
        assert!(!verify_solution(&c11, &d2, &sol, &opts));
    }

    #[test]
    fn empty_moderate_set_falls_back() {
        // Single action for player 1: it is the worst case in every objective.
        let c1 = CostTensor::new(vec![m(&[&[1.0, 2.0]]), m(&[&[0.5, 0.1]])]).unwrap();
        let d2 = m(&[&[0.0, 1.0]]);
        let theta = WeightVector::new(vec![1.0, 1.0]).unwrap();
        let res = select_policy(&c1, &d2, &theta, &AdjustOptions::default()).unwrap();
        assert_eq!(res.method, SelectionMethod::ScalarFallback);
        assert_eq!(res.candidates_tried, 0);
        assert_eq!(res.row_policy, 0);
    }

    #[test]
    fn single_feasible_candidate_is_adjusted_and_nash() {
        // Player 2's security column is 0 (column maxes 2, 3, 4).
        // Rows 0 and 2 are worst-case; row 1 is the only moderate candidate.
        let c1 = CostTensor::new(vec![
            m(&[&[0.0, 1.0, 1.0], &[0.5, 0.0, 1.0], &[1.0, 1.0, 0.0]]),
            m(&[&[1.0, 0.0, 0.0], &[0.5, 1.0, 0.0], &[0.0, 0.0, 1.0]]),
        ])
        .unwrap();
        let d2 = m(&[&[2.0, 3.0, 4.0], &[0.0, 1.0, 2.0], &[1.0, 0.5, 3.0]]);
        let theta = WeightVector::new(vec![0.5, 0.5]).unwrap();
        let opts = AdjustOptions::default();
        let res = select_policy_traced(&c1, &d2, &theta, &opts).unwrap();
        assert_eq!(res.candidates_tried, 1);
        assert_eq!(res.method, SelectionMethod::Adjusted);
        assert_eq!((res.row_policy, res.col_policy), (1, 0));
        let sol = res.solution.as_ref().unwrap();
        let adjusted = c1.prime().add(&sol.adjustment).unwrap();
        assert!(is_nash(&adjusted, &d2, PolicyPair::new(res.row_policy, res.col_policy)).unwrap());
        assert_eq!(res.solves.len(), 1);
        assert!(res.solves[0].accepted);
    }
}
