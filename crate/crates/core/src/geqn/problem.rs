use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Bounds, SmoothMap};
use crate::avi::{dist_inf, DenseMatrix, LuFactorization};
use crate::error::{Error, Result};

/// Where the regularity modulus λ came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LambdaSource {
    /// Given by the caller and taken on trust.
    Supplied,
    /// `‖f'(x₀)⁻¹‖∞`, valid for the all-free box only.
    ComputedFromJacobian,
}

/// A generalized equation `0 ∈ f(x) + N_B(x)` with its starting point and
/// the constants used for certification.
#[derive(Clone)]
pub struct Problem {
    map: Arc<dyn SmoothMap>,
    bounds: Bounds,
    x0: Vec<f64>,
    lambda: f64,
    lambda_source: LambdaSource,
    pub lip_k: Option<f64>,
    pub smale_gamma: Option<f64>,
    pub b_override: Option<f64>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("family", &self.map.provenance())
            .field("dim", &self.dim())
            .field("bounds", &self.bounds)
            .field("x0", &self.x0)
            .field("lambda", &self.lambda)
            .field("lambda_source", &self.lambda_source)
            .finish()
    }
}

impl Problem {
    /// With `lambda = None` the modulus is computed from `f'(x₀)`, which is
    /// only meaningful (and only allowed) for the all-free box.
    pub fn new(
        map: Arc<dyn SmoothMap>,
        bounds: Bounds,
        x0: Vec<f64>,
        lambda: Option<f64>,
    ) -> Result<Self> {
        let n = map.dim();
        if bounds.dim() != n {
            return Err(Error::dim("problem box", n, bounds.dim()));
        }
        if x0.len() != n {
            return Err(Error::dim("problem x0", n, x0.len()));
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("x0 must be finite".into()));
        }
        let (lambda, lambda_source) = match lambda {
            Some(l) if l.is_finite() && l > 0.0 => (l, LambdaSource::Supplied),
            Some(l) => {
                return Err(Error::Parameter {
                    name: "lambda",
                    value: l,
                    reason: "must be finite and positive",
                })
            }
            None if bounds.is_all_free() => (
                regularity_modulus_smooth(&map.jacobian(&x0))?,
                LambdaSource::ComputedFromJacobian,
            ),
            None => {
                return Err(Error::Regularity(
                    "lambda must be supplied when the box constrains some coordinate".into(),
                ))
            }
        };
        Ok(Problem {
            map,
            bounds,
            x0,
            lambda,
            lambda_source,
            lip_k: None,
            smale_gamma: None,
            b_override: None,
        })
    }

    pub fn map(&self) -> &dyn SmoothMap {
        self.map.as_ref()
    }

    pub fn shared_map(&self) -> Arc<dyn SmoothMap> {
        Arc::clone(&self.map)
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn lambda_source(&self) -> LambdaSource {
        self.lambda_source
    }

    pub fn natural_residual(&self, x: &[f64]) -> f64 {
        natural_residual(self, x)
    }
}

/// `‖x − Π_B(x − f(x))‖∞`, zero exactly at solutions of `0 ∈ f(x) + N_B(x)`.
pub fn natural_residual(problem: &Problem, x: &[f64]) -> f64 {
    let f = problem.map.eval(x);
    let shifted: Vec<f64> = x.iter().zip(&f).map(|(x, f)| x - f).collect();
    dist_inf(x, &problem.bounds.clamp(&shifted))
}

/// `E_f(x, y) = f(y) − [f(x) + f'(x)(y − x)]`.
pub fn linearization_error(map: &dyn SmoothMap, x: &[f64], y: &[f64]) -> Vec<f64> {
    let fx = map.eval(x);
    let fy = map.eval(y);
    let d: Vec<f64> = y.iter().zip(x).map(|(y, x)| y - x).collect();
    let jd = map.jacobian(x).mul_vec(&d);
    fy.iter()
        .zip(fx.iter().zip(&jd))
        .map(|(fy, (fx, jd))| fy - (fx + jd))
        .collect()
}

/// `λ = ‖J0⁻¹‖∞` for `F ≡ 0`, from the explicit inverse.
pub fn regularity_modulus_smooth(j0: &DenseMatrix) -> Result<f64> {
    if !j0.is_square() {
        return Err(Error::dim(
            "regularity modulus: square Jacobian",
            j0.rows(),
            j0.cols(),
        ));
    }
    let lu = LuFactorization::new(j0)
        .map_err(|e| Error::Regularity(format!("jacobian at x0 is singular: {e}")))?;
    Ok(lu.inverse().norm_inf())
}
