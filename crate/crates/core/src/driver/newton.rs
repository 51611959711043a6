use serde::{Deserialize, Serialize};

use crate::avi::{dist_inf, solve_affine_ge, AviStatus};
use crate::error::{Error, Result};
use crate::geqn::{natural_residual, Problem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol_residual: f64,
    pub tol_step: f64,
    pub max_iter: usize,
    /// Pivot budget per subproblem; `None` means 50 times the LCP dimension.
    pub sub_max_pivots: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol_residual: 1e-10,
            tol_step: 1e-12,
            max_iter: 50,
            sub_max_pivots: None,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tol_residual", self.tol_residual),
            ("tol_step", self.tol_step),
        ] {
            if !(v > 0.0) {
                return Err(Error::Parameter {
                    name,
                    value: v,
                    reason: "tolerances must be positive",
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    /// Last natural residual is at or below `tol_residual`.
    Converged,
    /// The step fell below `tol_step` while the residual is still above
    /// `tol_residual`.
    Stalled,
    MaxIter,
    SubproblemFailure {
        iteration: usize,
        status: AviStatus,
        message: String,
    },
}

/// Subproblem metadata for one outer step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub status: AviStatus,
    pub pivots: usize,
    pub sub_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationHistory {
    /// `x_0, …, x_m`.
    pub iterates: Vec<Vec<f64>>,
    /// `‖x_{k+1} − x_k‖∞`, one per step.
    pub steps: Vec<f64>,
    /// Natural residual at every iterate.
    pub residuals: Vec<f64>,
    /// `‖x_{k+1} − x_1‖∞`, one per step, for inspecting the selection ball.
    pub dist_to_x1: Vec<f64>,
    pub sub_stats: Vec<StepStats>,
    pub outcome: Outcome,
}

impl IterationHistory {
    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    pub fn last(&self) -> &[f64] {
        self.iterates.last().expect("history holds x0")
    }

    pub fn final_residual(&self) -> f64 {
        *self.residuals.last().expect("history holds x0")
    }

    pub fn converged(&self) -> bool {
        self.outcome == Outcome::Converged
    }
}

/// Runs `x_{k+1} ∈ {y : 0 ∈ f(x_k) + f'(x_k)(y − x_k) + N_B(y)}` from `x_0`.
///
/// Each subproblem is passed to [`solve_affine_ge`] with
/// `c = f(x_k) − f'(x_k)x_k`; for the all-free box this is the classical
/// Newton step. Subproblem failures end the run and are recorded in the
/// outcome rather than returned as errors.
pub fn josephy_newton(problem: &Problem, opts: &SolverOptions) -> Result<IterationHistory> {
    opts.validate()?;
    let map = problem.map();
    let bounds = problem.bounds();
    let mut x = problem.x0().to_vec();
    let mut history = IterationHistory {
        iterates: vec![x.clone()],
        steps: Vec::new(),
        residuals: vec![natural_residual(problem, &x)],
        dist_to_x1: Vec::new(),
        sub_stats: Vec::new(),
        outcome: Outcome::MaxIter,
    };
    if history.residuals[0] <= opts.tol_residual {
        history.outcome = Outcome::Converged;
        return Ok(history);
    }

    for k in 0..opts.max_iter {
        let fx = map.eval(&x);
        let j = map.jacobian(&x);
        let jx = j.mul_vec(&x);
        let c: Vec<f64> = fx.iter().zip(&jx).map(|(f, jx)| f - jx).collect();
        let sol = match solve_affine_ge(&j, &c, bounds, opts.sub_max_pivots) {
            Ok(sol) => sol,
            Err(e) => {
                let status = match &e {
                    Error::Subproblem { status, .. } => *status,
                    _ => AviStatus::Singular,
                };
                history.outcome = Outcome::SubproblemFailure {
                    iteration: k,
                    status,
                    message: e.to_string(),
                };
                return Ok(history);
            }
        };
        let y = sol.y;
        let step = dist_inf(&y, &x);
        let residual = natural_residual(problem, &y);
        let x1 = history.iterates.get(1).unwrap_or(&y);
        history.dist_to_x1.push(dist_inf(&y, x1));
        history.steps.push(step);
        history.residuals.push(residual);
        history.sub_stats.push(StepStats {
            status: sol.status,
            pivots: sol.pivots,
            sub_residual: sol.complementarity_residual,
        });
        history.iterates.push(y.clone());
        x = y;

        if residual <= opts.tol_residual {
            history.outcome = Outcome::Converged;
            return Ok(history);
        }
        if step <= opts.tol_step {
            history.outcome = Outcome::Stalled;
            return Ok(history);
        }
    }
    Ok(history)
}
