//! Smooth maps `f: ℝⁿ → ℝⁿ` with analytic Jacobians, and the builtin
//! problem families.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::avi::DenseMatrix;
use crate::error::{Error, Result};
use crate::exec::{self, item_rng, Execution};

/// A square smooth map with its Jacobian.
pub trait SmoothMap: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64]) -> Vec<f64>;

    fn jacobian(&self, x: &[f64]) -> DenseMatrix;

    /// Family name (`poly1d`, `ncp_poly`, `qp_kkt`, `external`, ...).
    fn provenance(&self) -> &str;
}

fn horner(coefficients: &[f64], x: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// `n`-th derivative of `Σ c_j x^j` at `x`.
fn poly_derivative(coefficients: &[f64], order: usize, x: f64) -> f64 {
    let mut acc = 0.0;
    for j in (order..coefficients.len()).rev() {
        let falling: f64 = ((j - order + 1)..=j).map(|v| v as f64).product();
        acc = acc * x + coefficients[j] * falling;
    }
    acc
}

fn check_finite(what: &str, v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::Domain(format!("{what}[{i}] is not finite"))),
        None => Ok(()),
    }
}

/// Scalar polynomial `f(x) = c_0 + c_1 x + … + c_d x^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly1d {
    coefficients: Vec<f64>,
}

impl Poly1d {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::Domain(
                "poly1d needs at least one coefficient".into(),
            ));
        }
        check_finite("coefficients", &coefficients)?;
        Ok(Poly1d { coefficients })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn derivative(&self, order: usize, x: f64) -> f64 {
        poly_derivative(&self.coefficients, order, x)
    }
}

impl SmoothMap for Poly1d {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        vec![horner(&self.coefficients, x[0])]
    }

    fn jacobian(&self, x: &[f64]) -> DenseMatrix {
        DenseMatrix::from_diag(&[self.derivative(1, x[0])])
    }

    fn provenance(&self) -> &str {
        "poly1d"
    }
}

/// Componentwise polynomials plus an optional linear coupling:
/// `f_i(x) = p_i(x_i) + (Mx)_i`. Posed over the nonnegative orthant by
/// default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NcpPoly {
    coefficients: Vec<Vec<f64>>,
    coupling: Option<DenseMatrix>,
}

impl NcpPoly {
    pub fn new(coefficients: Vec<Vec<f64>>, coupling: Option<DenseMatrix>) -> Result<Self> {
        let n = coefficients.len();
        if n == 0 {
            return Err(Error::Domain(
                "ncp_poly needs at least one component".into(),
            ));
        }
        for (i, c) in coefficients.iter().enumerate() {
            if c.is_empty() {
                return Err(Error::Domain(format!(
                    "ncp_poly component {i} has no coefficients"
                )));
            }
            check_finite("coefficients", c)?;
        }
        if let Some(m) = &coupling {
            if m.rows() != n || m.cols() != n {
                return Err(Error::dim("ncp_poly coupling", n, m.rows().max(m.cols())));
            }
        }
        Ok(NcpPoly {
            coefficients,
            coupling,
        })
    }

    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.coefficients
    }

    pub fn coupling(&self) -> Option<&DenseMatrix> {
        self.coupling.as_ref()
    }
}

impl SmoothMap for NcpPoly {
    fn dim(&self) -> usize {
        self.coefficients.len()
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut f: Vec<f64> = self
            .coefficients
            .iter()
            .zip(x)
            .map(|(c, &xi)| horner(c, xi))
            .collect();
        if let Some(m) = &self.coupling {
            for (fi, v) in f.iter_mut().zip(m.mul_vec(x)) {
                *fi += v;
            }
        }
        f
    }

    fn jacobian(&self, x: &[f64]) -> DenseMatrix {
        let diag: Vec<f64> = self
            .coefficients
            .iter()
            .zip(x)
            .map(|(c, &xi)| poly_derivative(c, 1, xi))
            .collect();
        let mut j = DenseMatrix::from_diag(&diag);
        if let Some(m) = &self.coupling {
            for r in 0..self.dim() {
                for k in 0..self.dim() {
                    j[(r, k)] += m[(r, k)];
                }
            }
        }
        j
    }

    fn provenance(&self) -> &str {
        "ncp_poly"
    }
}

/// KKT map of the convex QP `min ½xᵀQx + cᵀx  s.t.  Ax ≤ b` in the variables
/// `(x, μ)`: `(Qx + c + Aᵀμ, b − Ax)`, posed over `ℝⁿ × ℝᵐ₊`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpKkt {
    q: DenseMatrix,
    c: Vec<f64>,
    a: DenseMatrix,
    b: Vec<f64>,
}

impl QpKkt {
    pub fn new(q: DenseMatrix, c: Vec<f64>, a: DenseMatrix, b: Vec<f64>) -> Result<Self> {
        let n = q.rows();
        if !q.is_square() {
            return Err(Error::dim("qp_kkt: square Q", n, q.cols()));
        }
        if c.len() != n {
            return Err(Error::dim("qp_kkt: c", n, c.len()));
        }
        if a.rows() > 0 && a.cols() != n {
            return Err(Error::dim("qp_kkt: columns of A", n, a.cols()));
        }
        if a.rows() != b.len() {
            return Err(Error::dim("qp_kkt: b", a.rows(), b.len()));
        }
        check_finite("c", &c)?;
        check_finite("b", &b)?;
        Ok(QpKkt { q, c, a, b })
    }

    pub fn primal_dim(&self) -> usize {
        self.q.rows()
    }

    pub fn constraint_count(&self) -> usize {
        self.b.len()
    }

    /// Free primal block followed by nonnegative multipliers.
    pub fn default_bounds(&self) -> super::Bounds {
        let n = self.primal_dim();
        let m = self.constraint_count();
        let mut lower = vec![f64::NEG_INFINITY; n];
        lower.extend(std::iter::repeat_n(0.0, m));
        super::Bounds::new(lower, vec![f64::INFINITY; n + m]).expect("valid box")
    }

    pub fn q(&self) -> &DenseMatrix {
        &self.q
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }
}

impl SmoothMap for QpKkt {
    fn dim(&self) -> usize {
        self.primal_dim() + self.constraint_count()
    }

    fn eval(&self, z: &[f64]) -> Vec<f64> {
        let n = self.primal_dim();
        let (x, mu) = z.split_at(n);
        let mut top = self.q.mul_vec(x);
        if !mu.is_empty() {
            for (t, v) in top.iter_mut().zip(self.a.transpose().mul_vec(mu)) {
                *t += v;
            }
        }
        for (t, c) in top.iter_mut().zip(&self.c) {
            *t += c;
        }
        let ax = if mu.is_empty() {
            Vec::new()
        } else {
            self.a.mul_vec(x)
        };
        top.extend(self.b.iter().zip(ax).map(|(b, ax)| b - ax));
        top
    }

    fn jacobian(&self, _z: &[f64]) -> DenseMatrix {
        let n = self.primal_dim();
        let m = self.constraint_count();
        let mut j = DenseMatrix::zeros(n + m, n + m);
        for r in 0..n {
            for k in 0..n {
                j[(r, k)] = self.q[(r, k)];
            }
        }
        for i in 0..m {
            for k in 0..n {
                j[(k, n + i)] = self.a[(i, k)];
                j[(n + i, k)] = -self.a[(i, k)];
            }
        }
        j
    }

    fn provenance(&self) -> &str {
        "qp_kkt"
    }
}

/// `coef · Π_j x_j^{powers_j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    pub powers: Vec<u32>,
}

impl Monomial {
    fn eval(&self, x: &[f64]) -> f64 {
        self.powers
            .iter()
            .zip(x)
            .fold(self.coef, |acc, (&p, &xi)| acc * xi.powi(p as i32))
    }

    fn partial(&self, x: &[f64], var: usize) -> f64 {
        let p = self.powers[var];
        if p == 0 {
            return 0.0;
        }
        let mut acc = self.coef * p as f64;
        for (j, (&pj, &xj)) in self.powers.iter().zip(x).enumerate() {
            let e = if j == var { pj - 1 } else { pj };
            acc *= xj.powi(e as i32);
        }
        acc
    }
}

/// General polynomial system given as raw monomial lists, one per component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolySystem {
    terms: Vec<Vec<Monomial>>,
}

impl PolySystem {
    pub fn new(terms: Vec<Vec<Monomial>>) -> Result<Self> {
        let n = terms.len();
        if n == 0 {
            return Err(Error::Domain("polynomial system has no components".into()));
        }
        for (i, comp) in terms.iter().enumerate() {
            for (t, m) in comp.iter().enumerate() {
                if m.powers.len() != n {
                    return Err(Error::Domain(format!(
                        "terms[{i}][{t}]: expected {n} powers, got {}",
                        m.powers.len()
                    )));
                }
                if !m.coef.is_finite() {
                    return Err(Error::Domain(format!(
                        "terms[{i}][{t}]: coefficient not finite"
                    )));
                }
            }
        }
        Ok(PolySystem { terms })
    }

    pub fn terms(&self) -> &[Vec<Monomial>] {
        &self.terms
    }
}

impl SmoothMap for PolySystem {
    fn dim(&self) -> usize {
        self.terms.len()
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.terms
            .iter()
            .map(|comp| comp.iter().map(|m| m.eval(x)).sum())
            .collect()
    }

    fn jacobian(&self, x: &[f64]) -> DenseMatrix {
        let n = self.dim();
        let mut j = DenseMatrix::zeros(n, n);
        for (i, comp) in self.terms.iter().enumerate() {
            for k in 0..n {
                j[(i, k)] = comp.iter().map(|m| m.partial(x, k)).sum();
            }
        }
        j
    }

    fn provenance(&self) -> &str {
        "external"
    }
}

/// Largest entrywise discrepancy between the analytic Jacobian and central
/// differences of `eval` at `x`, relative to `max(1, |J_ij|)`.
pub fn jacobian_discrepancy(map: &dyn SmoothMap, x: &[f64]) -> f64 {
    let n = map.dim();
    let j = map.jacobian(x);
    let mut worst: f64 = 0.0;
    let mut xp = x.to_vec();
    for k in 0..n {
        let h = 1e-6 * x[k].abs().max(1.0);
        xp[k] = x[k] + h;
        let fp = map.eval(&xp);
        xp[k] = x[k] - h;
        let fm = map.eval(&xp);
        xp[k] = x[k];
        for i in 0..n {
            let fd = (fp[i] - fm[i]) / (2.0 * h);
            worst = worst.max((fd - j[(i, k)]).abs() / j[(i, k)].abs().max(1.0));
        }
    }
    worst
}

/// Finite-difference validation of the Jacobian at `points` random points of
/// the ∞-ball `B(center, radius)`. Returns the worst relative discrepancy.
pub fn validate_jacobian(
    map: &dyn SmoothMap,
    center: &[f64],
    radius: f64,
    points: usize,
    seed: u64,
    exec: Execution,
) -> f64 {
    exec::map_indexed(points, exec, |i| {
        let mut rng = item_rng(seed, i);
        let x: Vec<f64> = center
            .iter()
            .map(|c| c + radius * rng.random_range(-1.0..=1.0))
            .collect();
        jacobian_discrepancy(map, &x)
    })
    .into_iter()
    .fold(0.0, f64::max)
}
