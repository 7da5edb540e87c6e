//! Dense convex quadratic programs with lower bounds on some variables.
//!
//! minimize `0.5 x'Hx + g'x` subject to `x_i >= lb_i`, where `lb_i` may be
//! `-inf`. `H` must be symmetric positive definite. Solved with a primal
//! active-set method; problems here have at most a few dozen variables.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug)]
pub struct BoundedQp {
    pub hessian: DMatrix<f64>,
    pub linear: DVector<f64>,
    pub lower: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct QpSolution {
    pub x: DVector<f64>,
    pub iterations: usize,
    /// Max of stationarity, complementarity and dual-feasibility violations.
    pub kkt_residual: f64,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum QpError {
    #[error("hessian is not positive definite on the free subspace")]
    NotPositiveDefinite,
    #[error("no convergence after {0} iterations")]
    IterationCap(usize),
}

impl BoundedQp {
    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.hessian * x)) + self.linear.dot(x)
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.hessian * x + &self.linear
    }

    pub fn kkt_residual(&self, x: &DVector<f64>) -> f64 {
        let grad = self.gradient(x);
        let mut worst: f64 = 0.0;
        for i in 0..self.dim() {
            let lb = self.lower[i];
            worst = worst.max((lb - x[i]).max(0.0));
            if lb.is_finite() && (x[i] - lb).abs() <= 1e-12 * (1.0 + lb.abs()) {
                // Active bound: multiplier is the gradient and must be non-negative.
                worst = worst.max((-grad[i]).max(0.0));
            } else {
                worst = worst.max(grad[i].abs());
            }
        }
        worst
    }

    pub fn solve(&self, max_iter: usize) -> Result<QpSolution, QpError> {
        let n = self.dim();
        let tol = 1e-11 * (1.0 + self.hessian.amax());
        let mut x = DVector::from_iterator(n, self.lower.iter().map(|&lb| if lb.is_finite() { lb } else { 0.0 }));
        let mut active: Vec<bool> = self.lower.iter().map(|lb| lb.is_finite()).collect();

        for iteration in 1..=max_iter {
            let target = self.solve_subproblem(&x, &active)?;
            let step = &target - &x;
            if step.amax() <= 1e-13 * (1.0 + x.amax()) {
                let grad = self.gradient(&target);
                let release = (0..n)
                    .filter(|&i| active[i])
                    .min_by(|&a, &b| grad[a].total_cmp(&grad[b]))
                    .filter(|&i| grad[i] < -tol);
                x = target;
                match release {
                    Some(i) => active[i] = false,
                    None => {
                        let kkt_residual = self.kkt_residual(&x);
                        return Ok(QpSolution {
                            x,
                            iterations: iteration,
                            kkt_residual,
                        });
                    }
                }
                continue;
            }

            let mut alpha = 1.0;
            let mut blocking = None;
            for i in 0..n {
                if active[i] || !self.lower[i].is_finite() || step[i] >= 0.0 {
                    continue;
                }
                let ratio = (self.lower[i] - x[i]) / step[i];
                if ratio < alpha {
                    alpha = ratio.max(0.0);
                    blocking = Some(i);
                }
            }
            x += alpha * step;
            if let Some(i) = blocking {
                x[i] = self.lower[i];
                active[i] = true;
            }
        }
        Err(QpError::IterationCap(max_iter))
    }

    /// Minimizer over the free variables with active ones pinned to their bounds.
    fn solve_subproblem(&self, x: &DVector<f64>, active: &[bool]) -> Result<DVector<f64>, QpError> {
        let free: Vec<usize> = (0..self.dim()).filter(|&i| !active[i]).collect();
        let mut out = x.clone();
        for (i, on) in active.iter().enumerate() {
            if *on {
                out[i] = self.lower[i];
            }
        }
        if free.is_empty() {
            return Ok(out);
        }
        let k = free.len();
        let h_ff = DMatrix::from_fn(k, k, |a, b| self.hessian[(free[a], free[b])]);
        let rhs = DVector::from_fn(k, |a, _| {
            let i = free[a];
            let pinned: f64 = (0..self.dim())
                .filter(|&j| active[j])
                .map(|j| self.hessian[(i, j)] * out[j])
                .sum();
            -(self.linear[i] + pinned)
        });
        let chol = h_ff.cholesky().ok_or(QpError::NotPositiveDefinite)?;
        let sol = chol.solve(&rhs);
        for (a, &i) in free.iter().enumerate() {
            out[i] = sol[a];
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unconstrained_matches_linear_solve() {
        let qp = BoundedQp {
            hessian: DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]),
            linear: DVector::from_vec(vec![1.0, 2.0]),
            lower: vec![f64::NEG_INFINITY; 2],
        };
        let sol = qp.solve(100).unwrap();
        let expected = qp.hessian.clone().lu().solve(&(-&qp.linear)).unwrap();
        assert!((sol.x - expected).amax() < 1e-12);
        assert!(sol.kkt_residual < 1e-10);
    }

    #[test]
    fn bound_becomes_active() {
        // min (x-1)^2 + (y+2)^2 with y >= 0 -> (1, 0)
        let qp = BoundedQp {
            hessian: DMatrix::from_diagonal_element(2, 2, 2.0),
            linear: DVector::from_vec(vec![-2.0, 4.0]),
            lower: vec![f64::NEG_INFINITY, 0.0],
        };
        let sol = qp.solve(100).unwrap();
        assert!((sol.x[0] - 1.0).abs() < 1e-12);
        assert!(sol.x[1].abs() < 1e-12);
        assert!(sol.kkt_residual < 1e-10);
    }

    #[test]
    fn bound_released_when_interior_optimum() {
        // min (x-3)^2 with x >= 1 starts on the bound and must leave it.
        let qp = BoundedQp {
            hessian: DMatrix::from_element(1, 1, 2.0),
            linear: DVector::from_element(1, -6.0),
            lower: vec![1.0],
        };
        let sol = qp.solve(100).unwrap();
        assert!((sol.x[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn coupled_bounds_against_projected_gradient() {
        let h = DMatrix::from_row_slice(3, 3, &[3.0, 1.0, 0.5, 1.0, 2.0, 0.2, 0.5, 0.2, 1.5]);
        let g = DVector::from_vec(vec![2.0, -1.0, 3.0]);
        let lower = vec![0.0, 0.0, -0.5];
        let qp = BoundedQp {
            hessian: h.clone(),
            linear: g.clone(),
            lower: lower.clone(),
        };
        let sol = qp.solve(100).unwrap();

        // Independent check: long projected-gradient run.
        let mut y = DVector::zeros(3);
        for _ in 0..200_000 {
            let grad = &h * &y + &g;
            y -= 0.1 * grad;
            for i in 0..3 {
                y[i] = y[i].max(lower[i]);
            }
        }
        assert!((sol.x - y).amax() < 1e-8);
    }

    #[test]
    fn iteration_cap_reported() {
        let qp = BoundedQp {
            hessian: DMatrix::from_diagonal_element(3, 3, 1.0),
            linear: DVector::from_vec(vec![-1.0, -1.0, -1.0]),
            lower: vec![0.0; 3],
        };
        assert_eq!(qp.solve(1).unwrap_err(), QpError::IterationCap(1));
    }
}
