//! Scalar majorant functions and the Newton sequence they generate.
//!
//! A majorant `ψ: [0, R) → ℝ` bounds the variation of `λ f'` around the
//! starting point. Its smallest root `t*` is the radius of the ball where the
//! vector iteration lives, and the scalar Newton sequence `t_{k+1} = n_ψ(t_k)`
//! from `t_0 = 0` dominates the vector steps term by term.
//!
//! Two closed-form families are provided, plus user supplied evaluators:
//!
//! * Lipschitz: `ψ(t) = (K/2)t² − t + b` on `[0, 1/K)`.
//! * Smale (analytic): `ψ(t) = t/(1 − γt) − 2t + b` on `[0, 1/γ)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};

/// `3 − 2√2`, the largest admissible `bγ` for the analytic family.
pub const SMALE_LIMIT: f64 = 0.171_572_875_253_809_9;

/// Grid size used to sample h2 for custom majorants.
pub const H2_GRID: usize = 1024;

/// Absolute tolerance for `ψ'(0) = −1` on custom majorants.
const H1_TOL: f64 = 1e-12;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MajorantKind {
    LipschitzQuadratic,
    SmaleAnalytic,
    Custom,
}

impl fmt::Display for MajorantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MajorantKind::LipschitzQuadratic => "lipschitz",
            MajorantKind::SmaleAnalytic => "smale",
            MajorantKind::Custom => "custom",
        })
    }
}

#[derive(Clone)]
enum Shape {
    Lipschitz {
        k: f64,
    },
    Smale {
        gamma: f64,
    },
    Custom {
        psi: ScalarFn,
        d1: ScalarFn,
        d2: ScalarFn,
    },
}

/// An immutable majorant function together with the constants it carries.
#[derive(Clone)]
pub struct MajorantFunction {
    shape: Shape,
    b: f64,
    lambda: f64,
    domain_r: f64,
}

impl fmt::Debug for MajorantFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = f.debug_struct("MajorantFunction");
        s.field("kind", &self.kind());
        match self.shape {
            Shape::Lipschitz { k } => s.field("K", &k),
            Shape::Smale { gamma } => s.field("gamma", &gamma),
            Shape::Custom { .. } => &mut s,
        };
        s.field("b", &self.b)
            .field("lambda", &self.lambda)
            .field("domain_r", &self.domain_r)
            .finish()
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::Parameter {
            name,
            value,
            reason: "must be finite and positive",
        })
    }
}

impl MajorantFunction {
    /// `ψ(t) = (K/2)t² − t + b` on `[0, 1/K)`.
    pub fn lipschitz(k: f64, b: f64, lambda: f64) -> Result<Self> {
        let k = positive("K", k)?;
        Ok(MajorantFunction {
            shape: Shape::Lipschitz { k },
            b: positive("b", b)?,
            lambda: positive("lambda", lambda)?,
            domain_r: 1.0 / k,
        })
    }

    /// `ψ(t) = t/(1 − γt) − 2t + b` on `[0, 1/γ)`.
    pub fn smale(gamma: f64, b: f64, lambda: f64) -> Result<Self> {
        let gamma = positive("gamma", gamma)?;
        Ok(MajorantFunction {
            shape: Shape::Smale { gamma },
            b: positive("b", b)?,
            lambda: positive("lambda", lambda)?,
            domain_r: 1.0 / gamma,
        })
    }

    /// Builds a majorant from user evaluators of `ψ`, `ψ'` and `ψ''` on
    /// `[0, domain_r)`. `b` is taken as `ψ(0)`; h1 must hold to `1e-12`.
    pub fn custom<P, D1, D2>(psi: P, d1: D1, d2: D2, domain_r: f64, lambda: f64) -> Result<Self>
    where
        P: Fn(f64) -> f64 + Send + Sync + 'static,
        D1: Fn(f64) -> f64 + Send + Sync + 'static,
        D2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let domain_r = positive("domain_r", domain_r)?;
        let lambda = positive("lambda", lambda)?;
        let b = psi(0.0);
        let slope = d1(0.0);
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::Parameter {
                name: "psi(0)",
                value: b,
                reason: "h1 requires psi(0) > 0",
            });
        }
        if !((slope + 1.0).abs() <= H1_TOL) {
            return Err(Error::Parameter {
                name: "psi'(0)",
                value: slope,
                reason: "h1 requires psi'(0) = -1",
            });
        }
        Ok(MajorantFunction {
            shape: Shape::Custom {
                psi: Arc::new(psi),
                d1: Arc::new(d1),
                d2: Arc::new(d2),
            },
            b,
            lambda,
            domain_r,
        })
    }

    pub fn kind(&self) -> MajorantKind {
        match self.shape {
            Shape::Lipschitz { .. } => MajorantKind::LipschitzQuadratic,
            Shape::Smale { .. } => MajorantKind::SmaleAnalytic,
            Shape::Custom { .. } => MajorantKind::Custom,
        }
    }

    /// `ψ(0)`, the bound on the first step.
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Right endpoint `R` of the domain `[0, R)`.
    pub fn domain_r(&self) -> f64 {
        self.domain_r
    }

    pub fn k(&self) -> Option<f64> {
        match self.shape {
            Shape::Lipschitz { k } => Some(k),
            _ => None,
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match self.shape {
            Shape::Smale { gamma } => Some(gamma),
            _ => None,
        }
    }

    /// Same shape with a different `b`. Not available for custom majorants,
    /// whose `b` is fixed by `ψ(0)`.
    pub fn with_b(&self, b: f64) -> Result<Self> {
        match self.shape {
            Shape::Lipschitz { k } => Self::lipschitz(k, b, self.lambda),
            Shape::Smale { gamma } => Self::smale(gamma, b, self.lambda),
            Shape::Custom { .. } => Err(Error::Domain(
                "b of a custom majorant is fixed by psi(0)".into(),
            )),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match &self.shape {
            Shape::Lipschitz { k } => 0.5 * k * t * t - t + self.b,
            Shape::Smale { gamma } => t / (1.0 - gamma * t) - 2.0 * t + self.b,
            Shape::Custom { psi, .. } => psi(t),
        }
    }

    pub fn d1(&self, t: f64) -> f64 {
        match &self.shape {
            Shape::Lipschitz { k } => k * t - 1.0,
            Shape::Smale { gamma } => {
                let s = 1.0 - gamma * t;
                1.0 / (s * s) - 2.0
            }
            Shape::Custom { d1, .. } => d1(t),
        }
    }

    pub fn d2(&self, t: f64) -> f64 {
        match &self.shape {
            Shape::Lipschitz { k } => *k,
            Shape::Smale { gamma } => {
                let s = 1.0 - gamma * t;
                2.0 * gamma / (s * s * s)
            }
            Shape::Custom { d2, .. } => d2(t),
        }
    }

    /// Linearization error of the majorant,
    /// `e_ψ(t, u) = ψ(u) − [ψ(t) + ψ'(t)(u − t)]`.
    pub fn linearization_error(&self, t: f64, u: f64) -> f64 {
        self.value(u) - (self.value(t) + self.d1(t) * (u - t))
    }

    /// The existence inequality of a preset: label, value of the product and
    /// its limit. `None` for custom majorants.
    pub fn kantorovich_condition(&self) -> Option<(&'static str, f64, f64)> {
        match self.shape {
            Shape::Lipschitz { k } => Some(("bK ≤ 1/2", self.b * k, 0.5)),
            Shape::Smale { gamma } => Some(("bγ ≤ 3−2√2", self.b * gamma, SMALE_LIMIT)),
            Shape::Custom { .. } => None,
        }
    }

    /// Smallest root `t*` of `ψ` in `[0, R)`.
    ///
    /// Presets use the closed forms (in their cancellation-free rationalized
    /// shape). Custom majorants run the monotone scalar Newton sequence from
    /// zero, falling back to bracketing plus bisection when `ψ'` stops being
    /// negative or an iterate leaves the domain.
    pub fn smallest_root(&self) -> Result<f64> {
        match self.shape {
            Shape::Lipschitz { .. } | Shape::Smale { .. } => self.preset_root(),
            Shape::Custom { .. } => self.custom_root(),
        }
    }

    fn preset_root(&self) -> Result<f64> {
        let (label, product, limit) = self.kantorovich_condition().expect("preset");
        let boundary = on_boundary(product, limit);
        if !(product <= limit) && !boundary {
            return Err(Error::no_certificate(
                label,
                format!("product = {product:.17e} exceeds {limit:.17e}"),
            ));
        }
        let b = self.b;
        Ok(match self.shape {
            Shape::Lipschitz { .. } => {
                let disc = if boundary {
                    0.0
                } else {
                    (1.0 - 2.0 * product).max(0.0)
                };
                2.0 * b / (1.0 + disc.sqrt())
            }
            Shape::Smale { .. } => {
                let sum = 1.0 + product;
                let disc = if boundary {
                    0.0
                } else {
                    (sum * sum - 8.0 * product).max(0.0)
                };
                2.0 * b / (sum + disc.sqrt())
            }
            Shape::Custom { .. } => unreachable!(),
        })
    }

    fn custom_root(&self) -> Result<f64> {
        let tol = 1e-14 * self.b.max(1.0);
        let r = self.domain_r;
        let mut t = 0.0;
        for _ in 0..200 {
            let v = self.value(t);
            if v.abs() <= tol {
                return Ok(t);
            }
            if v < 0.0 {
                break;
            }
            let d = self.d1(t);
            if !(d < 0.0) {
                break;
            }
            let next = t - v / d;
            if !next.is_finite() || next >= r || next <= t {
                break;
            }
            t = next;
        }
        self.bisect_root(t, tol)
    }

    /// Scans `[from, R)` for the first sign change and bisects it.
    fn bisect_root(&self, from: f64, tol: f64) -> Result<f64> {
        const SCAN: usize = 4096;
        let r = self.domain_r;
        let mut lo = from;
        let mut hi = None;
        for i in 1..SCAN {
            let s = from + (r - from) * (i as f64 / SCAN as f64);
            let v = self.value(s);
            if v <= 0.0 {
                hi = Some(s);
                break;
            }
            lo = s;
        }
        let Some(mut hi) = hi else {
            return Err(Error::no_certificate(
                "ψ(t) = 0 for some t in (0, R)",
                format!("psi stays positive on [0, {r})"),
            ));
        };
        if self.value(lo) <= 0.0 {
            return Ok(lo);
        }
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let v = self.value(mid);
            if v.abs() <= tol {
                return Ok(mid);
            }
            if v > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    /// Newton map `n_ψ(t) = t − ψ(t)/ψ'(t)` on `[0, t*)`.
    pub fn newton_map(&self, t: f64) -> Result<f64> {
        let t_star = self.smallest_root()?;
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("newton map needs t >= 0, got {t}")));
        }
        if t >= t_star {
            return Err(Error::Domain(format!(
                "newton map needs t < t* = {t_star}, got {t}"
            )));
        }
        self.newton_step_at(t)
            .map(|step| t + step)
            .ok_or_else(|| Error::Domain(format!("psi'({t}) >= 0")))
    }

    /// `−ψ(t)/ψ'(t)`, or `None` when `ψ'(t) ≥ 0`.
    pub fn newton_step_at(&self, t: f64) -> Option<f64> {
        let d = self.d1(t);
        (d < 0.0).then(|| -self.value(t) / d)
    }

    /// Majorizing sequence `t_0 = 0, t_{k+1} = n_ψ(t_k)`, stopped once
    /// `t* − t_k ≤ tol` or after `max_iter` steps.
    ///
    /// An iterate that rounding pushes past `t*` is recorded as `t*`. If the
    /// step underflows to zero first, the trace is reported converged only
    /// if it already sits within a few ulps of `t*`.
    pub fn scalar_sequence(&self, max_iter: usize, tol: f64) -> Result<ScalarTrace> {
        let t_star = self.smallest_root()?;
        let mut t = vec![0.0];
        let mut residuals = vec![self.value(0.0)];
        let mut converged = t_star <= tol;
        let mut stalled = false;
        while !converged && t.len() <= max_iter {
            let cur = *t.last().unwrap();
            let next = match self.newton_step_at(cur) {
                Some(step) => cur + step,
                None => {
                    stalled = true;
                    break;
                }
            };
            if !(next > cur) {
                stalled = true;
                break;
            }
            // the exact sequence stays below t*; an overshoot is rounding
            let next = next.min(t_star);
            t.push(next);
            residuals.push(self.value(next));
            converged = t_star - next <= tol;
        }
        if stalled {
            let last = *t.last().unwrap();
            converged = t_star - last <= 8.0 * f64::EPSILON * t_star.max(1.0);
        }
        Ok(ScalarTrace {
            t,
            t_star,
            converged,
            residuals,
        })
    }

    /// Q-linear constant (always 1/2) and, under h4, the Q-quadratic constant
    /// `ψ''(t*)/(−2ψ'(t*))`.
    pub fn rate_constants(&self) -> Result<RateConstants> {
        let t_star = self.smallest_root()?;
        let quadratic = if self.h4_holds(t_star) {
            Some(self.d2(t_star) / (-2.0 * self.d1(t_star)))
        } else {
            None
        };
        Ok(RateConstants {
            linear: 0.5,
            quadratic,
        })
    }

    /// Closed-form quadratic constant of the presets:
    /// `K/(2√(1−2bK))` and `γ/[(1−γt*)(2(1−γt*)²−1)]`.
    pub fn closed_form_quadratic_rate(&self) -> Option<f64> {
        let t_star = self.smallest_root().ok()?;
        if !self.h4_holds(t_star) {
            return None;
        }
        match self.shape {
            Shape::Lipschitz { k } => Some(k / (2.0 * (1.0 - 2.0 * self.b * k).sqrt())),
            Shape::Smale { gamma } => {
                let s = 1.0 - gamma * t_star;
                Some(gamma / (s * (2.0 * s * s - 1.0)))
            }
            Shape::Custom { .. } => None,
        }
    }

    fn h4_holds(&self, t_star: f64) -> bool {
        match self.kantorovich_condition() {
            Some((_, product, limit)) => product < limit && !on_boundary(product, limit),
            None => self.d1(t_star) < 0.0,
        }
    }

    /// Evaluates h1–h4 and the preset existence inequality. Never fails; the
    /// report carries every failure.
    pub fn check_conditions(&self) -> HConditionsReport {
        let b = self.value(0.0);
        let slope = self.d1(0.0);
        let h1_ok = match self.shape {
            Shape::Custom { .. } => b > 0.0 && (slope + 1.0).abs() <= H1_TOL,
            _ => b > 0.0 && slope == -1.0,
        };
        let h1 = Check::new(h1_ok, format!("psi(0) = {b:e}, psi'(0) = {slope:e}"));

        let h2 = match self.shape {
            Shape::Custom { .. } => self.sample_h2(),
            _ => Check::new(true, "analytic: psi'' > 0 and nondecreasing on [0, R)"),
        };

        let root = self.smallest_root();
        let (h3, t_star) = match &root {
            Ok(t) => (Check::new(true, format!("t* = {t:.17e}")), Some(*t)),
            Err(e) => (Check::new(false, e.to_string()), None),
        };
        let h4 = match t_star {
            Some(t) => {
                let d = self.d1(t);
                let ok = self.h4_holds(t);
                let detail = if ok {
                    format!("psi'(t*) = {d:e} < 0")
                } else {
                    format!("psi'(t*) = {d:e} is not negative (double root)")
                };
                Check::new(ok, detail)
            }
            None => Check::new(false, "no root, h3 fails"),
        };

        let (kantorovich_condition, kantorovich_ok) = match self.kantorovich_condition() {
            Some((label, product, limit)) => (
                Some(label.to_string()),
                product <= limit || on_boundary(product, limit),
            ),
            None => (None, h3.ok),
        };

        HConditionsReport {
            h1,
            h2,
            h3,
            h4,
            kantorovich_condition,
            kantorovich_ok,
            t_star,
        }
    }

    /// h2 for user evaluators: `ψ'' > 0` (strictly increasing `ψ'`) and `ψ''`
    /// nondecreasing (convex `ψ'`) on a grid of `[0, 0.999R)`.
    fn sample_h2(&self) -> Check {
        let top = 0.999 * self.domain_r;
        let mut prev = f64::NEG_INFINITY;
        for i in 0..H2_GRID {
            let t = top * i as f64 / (H2_GRID - 1) as f64;
            let c = self.d2(t);
            if !(c > 0.0) {
                return Check::new(
                    false,
                    format!("sampled: psi''({t:e}) = {c:e} is not positive"),
                );
            }
            let slack = 1e-12 * c.abs().max(prev.abs()).max(1.0);
            if c + slack < prev {
                return Check::new(false, format!("sampled: psi'' decreases near t = {t:e}"));
            }
            prev = c;
        }
        Check::new(true, format!("sampled on {H2_GRID} points of [0, 0.999R)"))
    }
}

/// Products within a few ulps of the limit are treated as sitting on it: the
/// root is double there and the discriminant is pure rounding noise.
fn on_boundary(product: f64, limit: f64) -> bool {
    (product - limit).abs() <= 16.0 * f64::EPSILON * limit
}

/// Runs `scalar_sequence` for a batch of majorants.
pub fn scalar_batch(
    majorants: &[MajorantFunction],
    max_iter: usize,
    tol: f64,
    exec: Execution,
) -> Vec<Result<ScalarTrace>> {
    exec::map_slice(majorants, exec, |m| m.scalar_sequence(max_iter, tol))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarTrace {
    pub t: Vec<f64>,
    pub t_star: f64,
    pub converged: bool,
    /// `ψ(t_k)` for each recorded iterate.
    pub residuals: Vec<f64>,
}

impl ScalarTrace {
    /// Error envelope `t* − t_k`.
    pub fn envelope(&self) -> Vec<f64> {
        self.t.iter().map(|t| self.t_star - t).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateConstants {
    pub linear: f64,
    pub quadratic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub ok: bool,
    pub detail: String,
}

impl Check {
    pub fn new(ok: bool, detail: impl Into<String>) -> Self {
        Check {
            ok,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HConditionsReport {
    pub h1: Check,
    pub h2: Check,
    pub h3: Check,
    pub h4: Check,
    /// Label of the preset inequality, absent for custom majorants.
    pub kantorovich_condition: Option<String>,
    pub kantorovich_ok: bool,
    pub t_star: Option<f64>,
}

impl HConditionsReport {
    /// h1–h3, enough for existence and the linear rate.
    pub fn linear_certificate(&self) -> bool {
        self.h1.ok && self.h2.ok && self.h3.ok
    }

    /// First failing hypothesis among h1–h3, by name.
    pub fn first_failure(&self) -> Option<(String, &Check)> {
        let named = [("h1", &self.h1), ("h2", &self.h2), ("h3", &self.h3)];
        named.into_iter().find(|(_, c)| !c.ok).map(|(name, c)| {
            let label = match (name, &self.kantorovich_condition) {
                ("h3", Some(cond)) => cond.clone(),
                _ => name.to_string(),
            };
            (label, c)
        })
    }
}
