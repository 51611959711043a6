//! On-disk problem description and its conversion into solver objects.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use geqnewton_core::avi::{dist_inf, DenseMatrix};
use geqnewton_core::driver::{josephy_newton, SolverOptions};
use geqnewton_core::geqn::{Monomial, NcpPoly, Poly1d, PolySystem, QpKkt, SmoothMap};
use geqnewton_core::{Bounds, MajorantFunction, Problem};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Poly1d,
    NcpPoly,
    QpKkt,
    External,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Poly1d => "poly1d",
            Family::NcpPoly => "ncp_poly",
            Family::QpKkt => "qp_kkt",
            Family::External => "external",
        }
    }
}

/// `coefficients` is a flat list for `poly1d` and one list per component
/// for `ncp_poly`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficients {
    Flat(Vec<f64>),
    Nested(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MajorantChoice {
    Lipschitz,
    Smale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MajorantSpec {
    pub kind: MajorantChoice,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Coefficients>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<Vec<Vec<f64>>>,
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<f64>>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<Vec<Monomial>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Bounds>,
    pub x0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub majorant: MajorantSpec,
}

/// Where the majorant's `b` came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BSource {
    File,
    FirstStep,
}

#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub path: PathBuf,
    pub file: ProblemFile,
    pub problem: Problem,
    pub majorant: MajorantFunction,
    pub b_source: BSource,
}

pub(crate) fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        let full = e.to_string();
        let suffix = format!(" at line {} column {}", e.line(), e.column());
        CliError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: full.strip_suffix(&suffix).unwrap_or(&full).to_string(),
        }
    })
}

/// Reads and validates a problem file. When `majorant.b` is omitted, one
/// subproblem is solved and `b = ‖x1 − x0‖∞`.
pub fn parse_problem(path: &Path) -> Result<LoadedProblem, CliError> {
    let file: ProblemFile = parse_json(path)?;
    let (problem, majorant, b_source) = file.build(path)?;
    Ok(LoadedProblem {
        path: path.to_path_buf(),
        file,
        problem,
        majorant,
        b_source,
    })
}

fn matrix(path: &Path, field: &str, rows: &[Vec<f64>]) -> Result<DenseMatrix, CliError> {
    DenseMatrix::from_rows(rows).map_err(|e| CliError::field(path, field, e))
}

impl ProblemFile {
    fn require<'a, T>(
        &self,
        path: &Path,
        field: &str,
        v: &'a Option<T>,
    ) -> Result<&'a T, CliError> {
        v.as_ref().ok_or_else(|| {
            CliError::field(
                path,
                field,
                format!("required for family {}", self.family.name()),
            )
        })
    }

    /// Rejects parameters that belong to another family.
    fn forbid(&self, path: &Path, present: &[(&str, bool)]) -> Result<(), CliError> {
        match present.iter().find(|(_, p)| *p) {
            Some((name, _)) => Err(CliError::field(
                path,
                name,
                format!("not used by family {}", self.family.name()),
            )),
            None => Ok(()),
        }
    }

    fn map(&self, path: &Path) -> Result<(Arc<dyn SmoothMap>, Bounds), CliError> {
        let fam = |e: geqnewton_core::Error| CliError::field(path, self.family.name(), e);
        let qp_fields =
            self.q.is_some() || self.c.is_some() || self.a.is_some() || self.b.is_some();
        match self.family {
            Family::Poly1d => {
                self.forbid(
                    path,
                    &[
                        ("coupling", self.coupling.is_some()),
                        ("Q", qp_fields),
                        ("terms", self.terms.is_some()),
                    ],
                )?;
                let coefs = match self.require(path, "coefficients", &self.coefficients)? {
                    Coefficients::Flat(c) => c.clone(),
                    Coefficients::Nested(_) => {
                        return Err(CliError::field(
                            path,
                            "coefficients",
                            "poly1d expects a flat list",
                        ))
                    }
                };
                let map = Poly1d::new(coefs).map_err(fam)?;
                Ok((Arc::new(map), Bounds::free(1)))
            }
            Family::NcpPoly => {
                self.forbid(path, &[("Q", qp_fields), ("terms", self.terms.is_some())])?;
                let coefs = match self.require(path, "coefficients", &self.coefficients)? {
                    Coefficients::Nested(c) => c.clone(),
                    Coefficients::Flat(c) if c.is_empty() => Vec::new(),
                    Coefficients::Flat(_) => {
                        return Err(CliError::field(
                            path,
                            "coefficients",
                            "ncp_poly expects one coefficient list per component",
                        ))
                    }
                };
                let coupling = self
                    .coupling
                    .as_ref()
                    .map(|rows| matrix(path, "coupling", rows))
                    .transpose()?;
                let map = NcpPoly::new(coefs, coupling).map_err(fam)?;
                let n = map.dim();
                Ok((Arc::new(map), Bounds::nonnegative(n)))
            }
            Family::QpKkt => {
                self.forbid(
                    path,
                    &[
                        ("coefficients", self.coefficients.is_some()),
                        ("coupling", self.coupling.is_some()),
                        ("terms", self.terms.is_some()),
                    ],
                )?;
                let q = matrix(path, "Q", self.require(path, "Q", &self.q)?)?;
                let c = self.require(path, "c", &self.c)?.clone();
                let b = self.require(path, "b", &self.b)?.clone();
                let a_rows = self.require(path, "A", &self.a)?;
                let a = if a_rows.is_empty() {
                    DenseMatrix::zeros(0, q.cols())
                } else {
                    matrix(path, "A", a_rows)?
                };
                let map = QpKkt::new(q, c, a, b).map_err(fam)?;
                let bounds = map.default_bounds();
                Ok((Arc::new(map), bounds))
            }
            Family::External => {
                self.forbid(
                    path,
                    &[
                        ("coefficients", self.coefficients.is_some()),
                        ("coupling", self.coupling.is_some()),
                        ("Q", qp_fields),
                    ],
                )?;
                let terms = self.require(path, "terms", &self.terms)?.clone();
                let map = PolySystem::new(terms).map_err(fam)?;
                let n = map.dim();
                Ok((Arc::new(map), Bounds::free(n)))
            }
        }
    }

    /// Builds the problem and majorant described by the file.
    pub fn build(&self, path: &Path) -> Result<(Problem, MajorantFunction, BSource), CliError> {
        let (map, default_bounds) = self.map(path)?;
        let n = map.dim();
        let bounds = self.bounds.clone().unwrap_or(default_bounds);
        if bounds.dim() != n {
            return Err(CliError::field(
                path,
                "bounds",
                format!("expected {n} components, found {}", bounds.dim()),
            ));
        }
        if self.x0.len() != n {
            return Err(CliError::field(
                path,
                "x0",
                format!("expected {n} components, found {}", self.x0.len()),
            ));
        }
        let mut problem = Problem::new(map, bounds, self.x0.clone(), self.lambda)
            .map_err(|e| CliError::field(path, "lambda", e))?;

        let spec = &self.majorant;
        let (b, b_source) = match spec.b {
            Some(b) => (b, BSource::File),
            None => (
                first_step(&problem).map_err(|e| CliError::field(path, "majorant.b", e))?,
                BSource::FirstStep,
            ),
        };
        let lambda = problem.lambda();
        let majorant = match spec.kind {
            MajorantChoice::Lipschitz => {
                if spec.gamma.is_some() {
                    return Err(CliError::field(
                        path,
                        "majorant.gamma",
                        "not used by kind lipschitz",
                    ));
                }
                let k = spec.k.ok_or_else(|| {
                    CliError::field(path, "majorant.K", "required for kind lipschitz")
                })?;
                problem.lip_k = Some(k);
                MajorantFunction::lipschitz(k, b, lambda)
            }
            MajorantChoice::Smale => {
                if spec.k.is_some() {
                    return Err(CliError::field(
                        path,
                        "majorant.K",
                        "not used by kind smale",
                    ));
                }
                let gamma = spec.gamma.ok_or_else(|| {
                    CliError::field(path, "majorant.gamma", "required for kind smale")
                })?;
                problem.smale_gamma = Some(gamma);
                MajorantFunction::smale(gamma, b, lambda)
            }
        }
        .map_err(|e| CliError::field(path, "majorant", e))?;
        problem.b_override = spec.b;
        Ok((problem, majorant, b_source))
    }
}

/// `‖x1 − x0‖∞` after one subproblem solve.
fn first_step(problem: &Problem) -> Result<f64, String> {
    let opts = SolverOptions {
        max_iter: 1,
        ..SolverOptions::default()
    };
    let h = josephy_newton(problem, &opts).map_err(|e| e.to_string())?;
    match h.iterates.get(1) {
        Some(x1) => Ok(dist_inf(x1, &h.iterates[0])),
        None if h.converged() => Err("x0 already solves the problem, so ‖x1 − x0‖ = 0".into()),
        None => Err(format!("first subproblem failed: {:?}", h.outcome)),
    }
}
