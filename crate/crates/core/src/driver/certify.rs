use serde::{Deserialize, Serialize};

use super::IterationHistory;
use crate::avi::{dist_inf, norm_inf};
use crate::error::{Error, Result};
use crate::geqn::{LambdaSource, Problem};
use crate::majorant::{HConditionsReport, MajorantFunction, RateConstants, ScalarTrace};

/// Absolute slack on every recorded-vs-envelope comparison.
pub const BOUND_SLACK: f64 = 1e-9;

/// Slack on the empirical quadratic ratio.
const QUADRATIC_SLACK: f64 = 1e-6;

/// A hypothesis the certificate relies on but cannot check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assumption {
    pub name: String,
    pub statement: String,
}

impl Assumption {
    fn new(name: &str, statement: String) -> Self {
        Assumption {
            name: name.to_string(),
            statement,
        }
    }
}

/// `‖x̂ − x_{k+1}‖ / ‖x̂ − x_k‖²` against the quadratic rate constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticCheck {
    pub k: usize,
    pub ratio: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub t_star: f64,
    pub scalar_trace: ScalarTrace,
    /// `t_k` aligned index by index with the iterates. Entries past the end
    /// of the scalar trace (where rounding stops it at `t*`) are `t*`.
    pub t_aligned: Vec<f64>,
    /// `‖x_1 − x_0‖∞`.
    pub b: f64,
    /// `ψ(0)`.
    pub psi0: f64,
    pub initial_step_ok: bool,
    pub condition_report: HConditionsReport,
    pub rates: RateConstants,
    /// `‖x_{k+1} − x_k‖ ≤ t_{k+1} − t_k`, one per step.
    pub step_bound_ok: Vec<bool>,
    /// `t* − t_k`, one per iterate.
    pub error_envelope: Vec<f64>,
    /// `‖x̂ − x_k‖∞` with the final iterate `x̂` standing in for `x*`.
    pub proxy_errors: Vec<f64>,
    /// `‖x̂ − x_k‖ ≤ t* − t_k`, one per iterate (proxy).
    pub terminal_bound_ok: Vec<bool>,
    /// `(t* − t_k) − ‖x̂ − x_k‖`, one per iterate (proxy).
    pub terminal_slack: Vec<f64>,
    /// Empty when h4 fails or no error is above the noise floor (proxy).
    pub quadratic_checks: Vec<QuadraticCheck>,
    /// Every bound involving `x*` uses the final iterate.
    pub proxy: bool,
    pub proxy_residual: f64,
    /// Radius of `B[x_0, t*]` in which the solution is unique (together with
    /// the selection ball, see the assumptions).
    pub uniqueness_radius: f64,
    pub assumptions: Vec<Assumption>,
}

impl Certificate {
    /// All recorded data lie inside the majorant envelope.
    pub fn passed(&self) -> bool {
        self.initial_step_ok
            && self.step_bound_ok.iter().all(|&ok| ok)
            && self.terminal_bound_ok.iter().all(|&ok| ok)
            && self.quadratic_checks.iter().all(|c| c.ok)
    }

    /// Whether `point` lies outside the closed uniqueness ball around `x0`.
    pub fn excludes(&self, x0: &[f64], point: &[f64]) -> bool {
        dist_inf(x0, point) > self.uniqueness_radius
    }
}

/// Confronts a finished run with the majorant envelope.
///
/// Fails with [`Error::NoCertificate`] when `‖x_1 − x_0‖ ≤ ψ(0)` or one of
/// h1–h3 does not hold, naming the violated condition. Otherwise every
/// per-step comparison is recorded, pass or fail, and the run is untouched.
pub fn certify(
    history: &IterationHistory,
    problem: &Problem,
    psi: &MajorantFunction,
) -> Result<Certificate> {
    let xs = &history.iterates;
    if xs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "certification needs at least 2 iterates, history has {}",
            xs.len()
        )));
    }

    let b = dist_inf(&xs[1], &xs[0]);
    let psi0 = psi.value(0.0);
    let initial_step_ok = b <= psi0 * (1.0 + 1e-12);
    if !initial_step_ok {
        return Err(Error::no_certificate(
            "‖x1−x0‖ ≤ ψ(0)",
            format!("‖x1−x0‖ = {b:.17e} exceeds psi(0) = {psi0:.17e}"),
        ));
    }

    let condition_report = psi.check_conditions();
    if let Some((name, check)) = condition_report.first_failure() {
        return Err(Error::no_certificate(name, check.detail.clone()));
    }

    let m = xs.len() - 1;
    let scalar_trace = psi.scalar_sequence(m, 0.0)?;
    let t_star = scalar_trace.t_star;
    let t_aligned: Vec<f64> = (0..=m)
        .map(|k| scalar_trace.t.get(k).copied().unwrap_or(t_star))
        .collect();

    let step_bound_ok: Vec<bool> = history
        .steps
        .iter()
        .enumerate()
        .map(|(k, &s)| s <= t_aligned[k + 1] - t_aligned[k] + BOUND_SLACK)
        .collect();

    let proxy = history.last();
    let error_envelope: Vec<f64> = t_aligned.iter().map(|t| t_star - t).collect();
    let proxy_errors: Vec<f64> = xs.iter().map(|x| dist_inf(proxy, x)).collect();
    let terminal_slack: Vec<f64> = error_envelope
        .iter()
        .zip(&proxy_errors)
        .map(|(env, err)| env - err)
        .collect();
    let terminal_bound_ok = terminal_slack.iter().map(|s| *s >= -BOUND_SLACK).collect();

    let rates = psi.rate_constants()?;
    let floor = 100.0 * f64::EPSILON;
    // rounding in ‖x̂ − x_k‖ itself
    let noise = 4.0 * f64::EPSILON * norm_inf(proxy).max(1.0);
    let quadratic_checks = match rates.quadratic {
        Some(c) => proxy_errors
            .windows(2)
            .enumerate()
            .filter(|(_, e)| e[0] > floor && e[1] > floor)
            .map(|(k, e)| {
                let ratio = e[1] / (e[0] * e[0]);
                QuadraticCheck {
                    k,
                    ratio,
                    ok: e[1] <= (c + QUADRATIC_SLACK) * e[0] * e[0] + noise,
                }
            })
            .collect(),
        None => Vec::new(),
    };

    let assumptions = assumptions(problem, psi, t_star);

    Ok(Certificate {
        t_star,
        t_aligned,
        b,
        psi0,
        initial_step_ok,
        condition_report,
        rates,
        step_bound_ok,
        error_envelope,
        proxy_errors,
        terminal_bound_ok,
        terminal_slack,
        quadratic_checks,
        proxy: true,
        proxy_residual: history.final_residual(),
        uniqueness_radius: t_star,
        assumptions,
        scalar_trace,
    })
}

fn assumptions(problem: &Problem, psi: &MajorantFunction, t_star: f64) -> Vec<Assumption> {
    let lambda = problem.lambda();
    let mut out = Vec::new();
    match problem.lambda_source() {
        LambdaSource::Supplied => out.push(Assumption::new(
            "lambda",
            format!(
                "λ = {lambda:e} is a Lipschitz constant of the inverse partial linearization \
                 at x0 around x1 (user supplied, not verified)"
            ),
        )),
        LambdaSource::ComputedFromJacobian if !problem.bounds().is_all_free() => {
            out.push(Assumption::new(
                "lambda",
                format!("λ = {lambda:e} was computed for F ≡ 0 but the box is constrained"),
            ))
        }
        LambdaSource::ComputedFromJacobian => {}
    }
    if !problem.bounds().is_all_free() {
        out.push(Assumption::new(
            "strong_regularity",
            "f(x0) + f'(x0)(x − x0) + N_B(x) is strongly regular at x1 for 0 \
             (not verified for box constraints)"
                .to_string(),
        ));
    }
    out.push(Assumption::new(
        "majorant_condition",
        format!(
            "λ‖f'(y) − f'(x)‖ ≤ ψ'(‖y−x‖ + ‖x−x0‖) − ψ'(‖x−x0‖) for ‖y−x‖ + ‖x−x0‖ < R = {:e} \
             ({} majorant; checked by sampling only)",
            psi.domain_r(),
            psi.kind()
        ),
    ));
    out.push(Assumption::new("r_x0", format!("t* = {t_star:e} ≤ r_x0")));
    let r0_lhs = psi.d2(t_star) * psi.value(0.0).powi(2) / (2.0 * lambda);
    out.push(Assumption::new(
        "r_0",
        format!("ψ''(t*)ψ(0)²/(2λ) = {r0_lhs:e} < r_0"),
    ));
    out.push(Assumption::new(
        "r_x1",
        "each x_{k+1} is the subproblem solution inside B(x1, r_x1); the Lemke-path \
         solution is taken and ‖x_{k+1} − x1‖ is recorded per step"
            .to_string(),
    ));
    out
}
