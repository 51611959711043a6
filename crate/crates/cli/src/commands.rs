use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use geqnewton_core::avi::{default_max_pivots, DenseMatrix};
use geqnewton_core::driver::{
    certify, estimate_order, josephy_newton, IterationHistory, SolverOptions,
};
use geqnewton_core::geqn::{verify_majorant_condition, DEFAULT_SAMPLES};
use geqnewton_core::{lemke, AviStatus, Error, LcpInstance, MajorantFunction};
use serde::Deserialize;

use crate::error::CliError;
use crate::problem_file::{parse_json, parse_problem, LoadedProblem};
use crate::report::{
    envelope_rows, fmt_f64, history_csv, outcome_label, write_atomic, CertificateReport, Status,
    SCHEMA_VERSION,
};

/// Exit status of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    Failure = 1,
    NotCertified = 2,
}

#[derive(Debug, Parser)]
#[command(
    name = "geqnewton",
    version,
    about = "Josephy-Newton solver with majorant certificates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the Newton iteration and write history.csv.
    Solve(SolveArgs),
    /// Solve, then check the run against the majorant envelope and write
    /// certificate.json.
    Certify(CertifyArgs),
    /// Analyse a preset majorant on its own.
    Scalar(ScalarArgs),
    /// Solve one LCP with Lemke's method.
    Lcp(LcpArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub problem: PathBuf,
    /// Directory for report files.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long = "tol-res", default_value_t = 1e-10)]
    pub tol_res: f64,
    #[arg(long = "tol-step", default_value_t = 1e-12)]
    pub tol_step: f64,
    #[arg(long = "max-iter", default_value_t = 50)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    pub problem: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Seed for the sampled majorant-condition check.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScalarKind {
    Lipschitz,
    Smale,
}

#[derive(Debug, Args)]
pub struct ScalarArgs {
    #[arg(long, value_enum)]
    pub kind: ScalarKind,
    #[arg(long = "K")]
    pub k: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub b: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long = "max-iter", default_value_t = 30)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct LcpArgs {
    pub file: PathBuf,
    /// Pivot budget; defaults to 50 times the dimension.
    #[arg(long = "max-pivots")]
    pub max_pivots: Option<usize>,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<Exit, CliError> {
    match cli.command {
        Command::Solve(a) => solve(&a, out),
        Command::Certify(a) => certify_cmd(&a, out),
        Command::Scalar(a) => scalar(&a, out),
        Command::Lcp(a) => lcp(&a, out),
    }
}

fn print_table(history: &IterationHistory, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(
        out,
        "{:>4}  {:>12}  {:>12}  {:>6}",
        "k", "step", "residual", "pivots"
    )?;
    for (k, r) in history.residuals.iter().enumerate() {
        if k == 0 {
            writeln!(out, "{k:>4}  {:>12}  {r:>12.4e}  {:>6}", "-", "-")?;
        } else {
            let s = history.steps[k - 1];
            let p = history.sub_stats[k - 1].pivots;
            writeln!(out, "{k:>4}  {s:>12.4e}  {r:>12.4e}  {p:>6}")?;
        }
    }
    writeln!(out, "outcome: {}", outcome_label(history))
}

fn stdout_err(e: std::io::Error) -> CliError {
    CliError::io("<stdout>", e)
}

fn run_solver(loaded: &LoadedProblem, opts: &SolverOptions) -> Result<IterationHistory, CliError> {
    Ok(josephy_newton(&loaded.problem, opts)?)
}

fn solve(args: &SolveArgs, out: &mut dyn Write) -> Result<Exit, CliError> {
    let loaded = parse_problem(&args.problem)?;
    let opts = SolverOptions {
        tol_residual: args.tol_res,
        tol_step: args.tol_step,
        max_iter: args.max_iter,
        sub_max_pivots: None,
    };
    let history = run_solver(&loaded, &opts)?;
    print_table(&history, out).map_err(stdout_err)?;
    let path = args.out.join("history.csv");
    write_atomic(&path, history_csv(&history).as_bytes())?;
    writeln!(out, "wrote {}", path.display()).map_err(stdout_err)?;
    Ok(if history.converged() {
        Exit::Success
    } else {
        Exit::Failure
    })
}

fn certify_cmd(args: &CertifyArgs, out: &mut dyn Write) -> Result<Exit, CliError> {
    let loaded = parse_problem(&args.problem)?;
    let history = run_solver(&loaded, &SolverOptions::default())?;
    print_table(&history, out).map_err(stdout_err)?;
    write_atomic(
        &args.out.join("history.csv"),
        history_csv(&history).as_bytes(),
    )?;
    if !history.converged() {
        return Ok(Exit::Failure);
    }

    let verifier =
        verify_majorant_condition(&loaded.problem, &loaded.majorant, args.samples, args.seed);
    let (problem, majorant, solver) = CertificateReport::summaries(&loaded, &history);
    let conditions = loaded.majorant.check_conditions();
    let order = estimate_order(&history).ok();

    let report = match certify(&history, &loaded.problem, &loaded.majorant) {
        Ok(cert) => {
            let status = if !cert.passed() {
                Status::EnvelopeViolated
            } else if !verifier.all_passed() {
                Status::VerifierViolations
            } else {
                Status::Certified
            };
            CertificateReport {
                schema_version: SCHEMA_VERSION,
                status,
                problem,
                majorant,
                solver,
                failed_condition: None,
                failure_detail: None,
                envelope: envelope_rows(&cert, &history),
                conditions: cert.condition_report,
                t_star: Some(cert.t_star),
                rates: Some(cert.rates),
                uniqueness_radius: Some(cert.uniqueness_radius),
                proxy: cert.proxy,
                quadratic_checks: cert.quadratic_checks,
                assumptions: cert.assumptions,
                order,
                verifier,
            }
        }
        Err(Error::NoCertificate { condition, detail }) => CertificateReport {
            schema_version: SCHEMA_VERSION,
            status: Status::NoCertificate,
            problem,
            majorant,
            solver,
            failed_condition: Some(condition),
            failure_detail: Some(detail),
            conditions,
            t_star: None,
            rates: None,
            uniqueness_radius: None,
            proxy: true,
            envelope: Vec::new(),
            quadratic_checks: Vec::new(),
            assumptions: Vec::new(),
            order,
            verifier,
        },
        Err(e) => return Err(e.into()),
    };

    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    let path = args.out.join("certificate.json");
    write_atomic(&path, json.as_bytes())?;

    let w = |e| stdout_err(e);
    match (&report.status, &report.failed_condition) {
        (Status::NoCertificate, Some(c)) => {
            writeln!(out, "{c} violated: no certificate").map_err(w)?
        }
        _ => {
            writeln!(
                out,
                "t* = {}, uniqueness radius {}, quadratic constant {}",
                report.t_star.map_or("-".into(), fmt_f64),
                report.uniqueness_radius.map_or("-".into(), fmt_f64),
                report
                    .rates
                    .as_ref()
                    .and_then(|r| r.quadratic)
                    .map_or("-".into(), fmt_f64)
            )
            .map_err(w)?;
            let bad = report
                .envelope
                .iter()
                .filter(|r| r.step_bound_ok == Some(false) || !r.terminal_bound_ok)
                .count();
            writeln!(out, "envelope rows outside bounds: {bad}").map_err(w)?;
        }
    }
    writeln!(
        out,
        "majorant condition: {}/{} samples passed (seed {})",
        report.verifier.passed, report.verifier.samples, report.verifier.seed
    )
    .map_err(w)?;
    writeln!(
        out,
        "status: {}",
        serde_json::to_value(&report.status)?
            .as_str()
            .unwrap_or("?")
    )
    .map_err(w)?;
    writeln!(out, "wrote {}", path.display()).map_err(w)?;

    Ok(match report.status {
        Status::Certified => Exit::Success,
        _ => Exit::NotCertified,
    })
}

fn scalar(args: &ScalarArgs, out: &mut dyn Write) -> Result<Exit, CliError> {
    let psi = match (args.kind, args.k, args.gamma) {
        (ScalarKind::Lipschitz, Some(k), None) => {
            MajorantFunction::lipschitz(k, args.b, args.lambda)?
        }
        (ScalarKind::Smale, None, Some(g)) => MajorantFunction::smale(g, args.b, args.lambda)?,
        (ScalarKind::Lipschitz, ..) => {
            return Err(CliError::field(
                "<args>",
                "--K",
                "lipschitz needs --K and no --gamma",
            ))
        }
        (ScalarKind::Smale, ..) => {
            return Err(CliError::field(
                "<args>",
                "--gamma",
                "smale needs --gamma and no --K",
            ))
        }
    };
    let w = |e| stdout_err(e);
    let report = psi.check_conditions();
    writeln!(
        out,
        "majorant: {} (b = {}, R = {})",
        psi.kind(),
        fmt_f64(psi.b()),
        fmt_f64(psi.domain_r())
    )
    .map_err(w)?;
    if let (Some(label), Some((_, product, limit))) =
        (&report.kantorovich_condition, psi.kantorovich_condition())
    {
        writeln!(
            out,
            "{label}: product {} vs limit {}",
            fmt_f64(product),
            fmt_f64(limit)
        )
        .map_err(w)?;
    }
    for (name, check) in [
        ("h1", &report.h1),
        ("h2", &report.h2),
        ("h3", &report.h3),
        ("h4", &report.h4),
    ] {
        writeln!(
            out,
            "{name}: {} ({})",
            if check.ok { "ok" } else { "fails" },
            check.detail
        )
        .map_err(w)?;
    }
    if let Some((name, _)) = report.first_failure() {
        writeln!(out, "{name} violated").map_err(w)?;
        return Ok(Exit::NotCertified);
    }
    let trace = psi.scalar_sequence(args.max_iter, 0.0)?;
    writeln!(out, "t* = {}", fmt_f64(trace.t_star)).map_err(w)?;
    writeln!(out, "{:>4}  {:>24}  {:>12}", "k", "t_k", "t* - t_k").map_err(w)?;
    for (k, t) in trace.t.iter().enumerate() {
        writeln!(
            out,
            "{k:>4}  {:>24}  {:>12.4e}",
            fmt_f64(*t),
            trace.t_star - t
        )
        .map_err(w)?;
    }
    let rates = psi.rate_constants()?;
    writeln!(
        out,
        "linear rate {}, quadratic constant {}",
        rates.linear,
        rates.quadratic.map_or("none (h4 fails)".into(), fmt_f64)
    )
    .map_err(w)?;
    Ok(if report.h4.ok {
        Exit::Success
    } else {
        Exit::NotCertified
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LcpFile {
    #[serde(rename = "M")]
    m: Vec<Vec<f64>>,
    q: Vec<f64>,
}

fn lcp(args: &LcpArgs, out: &mut dyn Write) -> Result<Exit, CliError> {
    let file: LcpFile = parse_json(&args.file)?;
    let m = DenseMatrix::from_rows(&file.m).map_err(|e| CliError::field(&args.file, "M", e))?;
    let inst = LcpInstance::new(m, file.q).map_err(|e| CliError::field(&args.file, "q", e))?;
    let budget = args
        .max_pivots
        .unwrap_or_else(|| default_max_pivots(inst.dim()));
    let sol = lemke(&inst, budget);
    let w = |e| stdout_err(e);
    let join = |v: &[f64]| v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(", ");
    writeln!(out, "status: {:?}", sol.status).map_err(w)?;
    writeln!(out, "pivots: {}", sol.pivots).map_err(w)?;
    if sol.status == AviStatus::Solved {
        writeln!(out, "z = ({})", join(&sol.y)).map_err(w)?;
        writeln!(out, "w = ({})", join(&inst.slack(&sol.y))).map_err(w)?;
        writeln!(
            out,
            "complementarity residual: {}",
            fmt_f64(sol.complementarity_residual)
        )
        .map_err(w)?;
        Ok(Exit::Success)
    } else {
        Ok(Exit::Failure)
    }
}

/// Parses and runs, printing errors to stderr. Returns the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() {
                Exit::Failure as i32
            } else {
                Exit::Success as i32
            };
        }
    };
    match run(cli, out) {
        Ok(code) => code as i32,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            Exit::Failure as i32
        }
    }
}
