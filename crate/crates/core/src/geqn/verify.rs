//! Sampling checks of the majorant hypotheses against a concrete map.
//!
//! Both checks are report-only: they never prove the inequality, they look
//! for counterexamples among seeded random points. Every sample derives its
//! generator from `(seed, index)`, so reports are identical across execution
//! strategies and thread counts.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{linearization_error, Problem};
use crate::avi::{dist_inf, norm_inf};
use crate::exec::{self, item_rng, Execution};
use crate::majorant::MajorantFunction;

pub const DEFAULT_SAMPLES: usize = 2048;

/// Samples stay inside this fraction of the majorant domain.
const DOMAIN_SHRINK: f64 = 0.999;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorantCheckReport {
    pub samples: usize,
    pub passed: usize,
    /// Largest `λ‖f'(y) − f'(x)‖ − [ψ'(‖y−x‖ + ‖x−x₀‖) − ψ'(‖x−x₀‖)]`.
    pub worst_margin: f64,
    pub worst_pair: Option<(Vec<f64>, Vec<f64>)>,
    pub seed: u64,
}

impl MajorantCheckReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.samples
    }

    pub fn violations(&self) -> usize {
        self.samples - self.passed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearizationCheckReport {
    pub samples: usize,
    /// Violations of `λ‖E_f(x,y)‖ ≤ e_ψ(t,v)‖y−x‖²/(v−t)²`.
    pub first_violations: usize,
    /// Violations of `e_ψ(t,v)‖y−x‖²/(v−t)² ≤ ½ψ''(v)(v−t)²`.
    pub second_violations: usize,
    pub worst_first: f64,
    pub worst_second: f64,
    pub seed: u64,
}

impl LinearizationCheckReport {
    pub fn all_passed(&self) -> bool {
        self.first_violations == 0 && self.second_violations == 0
    }
}

/// A point `center + r·d` with `‖d‖∞ = 1`, so its distance to `center` is
/// exactly `r` up to rounding.
fn point_at(rng: &mut ChaCha8Rng, center: &[f64], r: f64) -> Vec<f64> {
    let n = center.len();
    let mut d: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let k = rng.random_range(0..n);
    d[k] = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    center.iter().zip(d).map(|(c, d)| c + r * d).collect()
}

pub fn verify_majorant_condition(
    problem: &Problem,
    psi: &MajorantFunction,
    samples: usize,
    seed: u64,
) -> MajorantCheckReport {
    verify_majorant_condition_with(problem, psi, samples, seed, Execution::default())
}

/// Checks `λ‖f'(y) − f'(x)‖∞ ≤ ψ'(‖y−x‖ + ‖x−x₀‖) − ψ'(‖x−x₀‖)` on `samples`
/// random pairs with `‖y−x‖ + ‖x−x₀‖ < R`.
pub fn verify_majorant_condition_with(
    problem: &Problem,
    psi: &MajorantFunction,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> MajorantCheckReport {
    let x0 = problem.x0();
    let lambda = problem.lambda();
    let reach = DOMAIN_SHRINK * psi.domain_r();
    let map = problem.map();

    let outcomes = exec::map_indexed(samples, exec, |i| {
        let mut rng = item_rng(seed, i);
        let r1 = reach * rng.random::<f64>();
        let r2 = (reach - r1) * rng.random::<f64>();
        let x = point_at(&mut rng, x0, r1);
        let y = point_at(&mut rng, &x, r2);
        let dx0 = dist_inf(&x, x0);
        let dyx = dist_inf(&y, &x);
        let lhs = lambda * map.jacobian(&y).sub(&map.jacobian(&x)).norm_inf();
        let rhs = psi.d1(dyx + dx0) - psi.d1(dx0);
        let margin = lhs - rhs;
        let ok = margin <= 1e-12 * (1.0 + rhs.abs());
        (ok, margin, x, y)
    });

    let mut report = MajorantCheckReport {
        samples,
        passed: 0,
        worst_margin: f64::NEG_INFINITY,
        worst_pair: None,
        seed,
    };
    for (ok, margin, x, y) in outcomes {
        report.passed += ok as usize;
        if margin > report.worst_margin {
            report.worst_margin = margin;
            report.worst_pair = Some((x, y));
        }
    }
    report
}

pub fn verify_linearization_bound(
    problem: &Problem,
    psi: &MajorantFunction,
    samples: usize,
    seed: u64,
) -> LinearizationCheckReport {
    verify_linearization_bound_with(problem, psi, samples, seed, Execution::default())
}

/// Samples `(x, y, t, v)` with `0 ≤ t < v < R`, `‖x−x₀‖ ≤ t`, `‖y−x‖ ≤ v−t`
/// and checks both inequalities of the linearization-error bound to an
/// absolute tolerance of `1e-12`.
pub fn verify_linearization_bound_with(
    problem: &Problem,
    psi: &MajorantFunction,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> LinearizationCheckReport {
    const TOL: f64 = 1e-12;
    let x0 = problem.x0();
    let lambda = problem.lambda();
    let reach = DOMAIN_SHRINK * psi.domain_r();
    let map = problem.map();

    let outcomes = exec::map_indexed(samples, exec, |i| {
        let mut rng = item_rng(seed, i);
        let t = reach * rng.random::<f64>();
        let v = t + (reach - t) * rng.random_range(f64::EPSILON..=1.0);
        let rx = t * rng.random::<f64>();
        let x = point_at(&mut rng, x0, rx);
        let ry = (v - t) * rng.random::<f64>();
        let y = point_at(&mut rng, &x, ry);
        let gap = v - t;
        let step = dist_inf(&y, &x);
        let lhs = lambda * norm_inf(&linearization_error(map, &x, &y));
        let ratio = (step / gap).powi(2);
        let middle = psi.linearization_error(t, v) * ratio;
        let right = 0.5 * psi.d2(v) * gap * gap;
        (lhs - middle, middle - right)
    });

    let mut report = LinearizationCheckReport {
        samples,
        first_violations: 0,
        second_violations: 0,
        worst_first: f64::NEG_INFINITY,
        worst_second: f64::NEG_INFINITY,
        seed,
    };
    for (first, second) in outcomes {
        report.first_violations += (first > TOL) as usize;
        report.second_violations += (second > TOL) as usize;
        report.worst_first = report.worst_first.max(first);
        report.worst_second = report.worst_second.max(second);
    }
    report
}
