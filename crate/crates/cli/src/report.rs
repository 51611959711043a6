//! Report files: per-iteration CSV and the certificate JSON.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use geqnewton_core::driver::{
    Assumption, Certificate, IterationHistory, OrderEstimate, QuadraticCheck,
};
use geqnewton_core::geqn::{LambdaSource, MajorantCheckReport};
use geqnewton_core::majorant::{HConditionsReport, RateConstants};
use serde::Serialize;

use crate::error::CliError;
use crate::problem_file::{BSource, LoadedProblem};

pub const SCHEMA_VERSION: u32 = 1;

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// 17 significant digits, enough to round-trip any binary64.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// One row per iterate: `k, x_0..x_{n-1}, step, residual, dist_to_x1,
/// pivots, sub_status`. Step-related columns are empty at `k = 0`.
pub fn history_csv(history: &IterationHistory) -> String {
    let n = history.iterates.first().map_or(0, Vec::len);
    let mut out = String::from("k");
    for i in 0..n {
        let _ = write!(out, ",x_{i}");
    }
    out.push_str(",step,residual,dist_to_x1,pivots,sub_status\n");
    for (k, x) in history.iterates.iter().enumerate() {
        let _ = write!(out, "{k}");
        for v in x {
            let _ = write!(out, ",{}", fmt_f64(*v));
        }
        let res = history
            .residuals
            .get(k)
            .map_or(String::new(), |r| fmt_f64(*r));
        if k == 0 {
            let _ = writeln!(out, ",,{res},,,");
        } else {
            let s = &history.sub_stats[k - 1];
            let _ = writeln!(
                out,
                ",{},{res},{},{},{:?}",
                fmt_f64(history.steps[k - 1]),
                fmt_f64(history.dist_to_x1[k - 1]),
                s.pivots,
                s.status
            );
        }
    }
    out
}

#[derive(Debug, Serialize)]
pub struct ProblemSummary {
    pub source: String,
    pub family: String,
    pub dim: usize,
    pub x0: Vec<f64>,
    pub lambda: f64,
    pub lambda_source: LambdaSource,
}

#[derive(Debug, Serialize)]
pub struct MajorantSummary {
    pub kind: String,
    pub b: f64,
    pub b_source: BSource,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub domain_r: f64,
}

#[derive(Debug, Serialize)]
pub struct SolverSummary {
    pub outcome: String,
    pub steps: usize,
    pub final_residual: f64,
    pub x_final: Vec<f64>,
}

/// Per-iterate envelope columns.
#[derive(Debug, Serialize)]
pub struct EnvelopeRow {
    pub k: usize,
    pub t_k: f64,
    /// `‖x_k − x_{k−1}‖`, absent at `k = 0`.
    pub step: Option<f64>,
    /// `t_k − t_{k−1}`, absent at `k = 0`.
    pub step_bound: Option<f64>,
    pub step_bound_ok: Option<bool>,
    pub error_proxy: f64,
    pub error_envelope: f64,
    pub terminal_slack: f64,
    pub terminal_bound_ok: bool,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Certified,
    EnvelopeViolated,
    VerifierViolations,
    NoCertificate,
}

#[derive(Debug, Serialize)]
pub struct CertificateReport {
    pub schema_version: u32,
    pub status: Status,
    pub problem: ProblemSummary,
    pub majorant: MajorantSummary,
    pub solver: SolverSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_condition: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure_detail: Option<String>,
    pub conditions: HConditionsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rates: Option<RateConstants>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniqueness_radius: Option<f64>,
    /// Bounds involving the solution use the final iterate in its place.
    pub proxy: bool,
    pub envelope: Vec<EnvelopeRow>,
    pub quadratic_checks: Vec<QuadraticCheck>,
    pub assumptions: Vec<Assumption>,
    pub order: Option<OrderEstimate>,
    pub verifier: MajorantCheckReport,
}

impl CertificateReport {
    pub fn summaries(
        loaded: &LoadedProblem,
        history: &IterationHistory,
    ) -> (ProblemSummary, MajorantSummary, SolverSummary) {
        let p = &loaded.problem;
        let m = &loaded.majorant;
        (
            ProblemSummary {
                source: loaded.path.display().to_string(),
                family: loaded.file.family.name().to_string(),
                dim: p.dim(),
                x0: p.x0().to_vec(),
                lambda: p.lambda(),
                lambda_source: p.lambda_source(),
            },
            MajorantSummary {
                kind: m.kind().to_string(),
                b: m.b(),
                b_source: loaded.b_source,
                k: m.k(),
                gamma: m.gamma(),
                domain_r: m.domain_r(),
            },
            SolverSummary {
                outcome: outcome_label(history),
                steps: history.step_count(),
                final_residual: history.final_residual(),
                x_final: history.last().to_vec(),
            },
        )
    }
}

pub fn outcome_label(history: &IterationHistory) -> String {
    serde_json::to_value(&history.outcome)
        .ok()
        .and_then(|v| v.get("kind").and_then(|k| k.as_str()).map(str::to_string))
        .unwrap_or_else(|| format!("{:?}", history.outcome))
}

pub fn envelope_rows(cert: &Certificate, history: &IterationHistory) -> Vec<EnvelopeRow> {
    (0..history.iterates.len())
        .map(|k| {
            let (step, step_bound, step_bound_ok) = if k == 0 {
                (None, None, None)
            } else {
                (
                    Some(history.steps[k - 1]),
                    Some(cert.t_aligned[k] - cert.t_aligned[k - 1]),
                    Some(cert.step_bound_ok[k - 1]),
                )
            };
            EnvelopeRow {
                k,
                t_k: cert.t_aligned[k],
                step,
                step_bound,
                step_bound_ok,
                error_proxy: cert.proxy_errors[k],
                error_envelope: cert.error_envelope[k],
                terminal_slack: cert.terminal_slack[k],
                terminal_bound_ok: cert.terminal_bound_ok[k],
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 2f64.sqrt(), 1e-300, -7.5e12] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested").join("out.txt");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "second");
        assert_eq!(fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }
}
