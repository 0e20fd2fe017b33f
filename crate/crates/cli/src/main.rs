//! `opcalc`: solve, evaluate and verify Bessel-type equations from JSON files.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 solve or verification
//! failure. Errors are written to stderr as `{"error": {"code", "message"}}`.

mod problem;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

use opcalc_core::transform::table_json;
use opcalc_core::{
    solve, solve_auto, verify, AnySolveReport, Coefficient, EquationSpec, EvalError, FormalSeries,
    SolveError, SolveOptions, TransformError,
};

use problem::{Equation, Problem};

const VALIDATION_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    InvalidJson(String),
    #[error("{0}")]
    Schema(String),
    #[error("coefficients mix exact strings and floating-point numbers")]
    MixedCoefficients,
    #[error("degenerate operator: leading coefficient is zero")]
    DegenerateOperator,
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    NegativeValuation(String),
    #[error("{0}")]
    Solve(String),
    #[error("{0}")]
    VerificationFailed(String),
}

impl CliError {
    fn code(&self) -> &'static str {
        match self {
            CliError::Io(_) => "io",
            CliError::InvalidJson(_) => "invalid_json",
            CliError::Schema(_) => "schema",
            CliError::MixedCoefficients => "mixed_coefficients",
            CliError::DegenerateOperator => "degenerate_operator",
            CliError::Usage(_) => "usage",
            CliError::NegativeValuation(_) => "negative_valuation",
            CliError::Solve(_) => "solve",
            CliError::VerificationFailed(_) => "verification_failed",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::NegativeValuation(_) | CliError::Solve(_) | CliError::VerificationFailed(_) => 2,
            _ => 1,
        }
    }
}

impl From<TransformError> for CliError {
    fn from(e: TransformError) -> Self {
        match e {
            TransformError::DegenerateOperator => CliError::DegenerateOperator,
            TransformError::InitialConditionCount { .. } | TransformError::NegativeRhsValuation => {
                CliError::Schema(e.to_string())
            }
            other => CliError::Solve(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::NegativeValuation(_) => CliError::NegativeValuation(e.to_string()),
            EvalError::Transform(t) => t.into(),
            other => CliError::Solve(other.to_string()),
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Transform(t) => t.into(),
            SolveError::Eval(v) => v.into(),
            other => CliError::Solve(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "opcalc", version, about = "Operational calculus solver for Bessel-type equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a problem file and print the report as JSON.
    Solve {
        file: PathBuf,
        /// Pair conjugate imaginary roots into ber/bei and use J for negative roots.
        #[arg(long)]
        real: bool,
    },
    /// Evaluate the solution at points in t, as CSV.
    Eval(EvalArgs),
    /// Print the transform table with nu substituted.
    Table {
        #[arg(long, allow_negative_numbers = true)]
        nu: f64,
    },
    /// Check a series against the equation of a problem file.
    Verify { file: PathBuf, series: PathBuf },
}

#[derive(Debug, Args)]
struct EvalArgs {
    file: PathBuf,
    /// Comma-separated points.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with = "range")]
    t: Vec<f64>,
    /// `start:end:count`, endpoints included.
    #[arg(long)]
    range: Option<String>,
    #[arg(long)]
    real: bool,
}

fn options(p: &Problem, real: bool) -> SolveOptions {
    SolveOptions {
        truncation: p.truncation,
        real_form: real || p.real_form,
        tolerance: p.tolerance,
        ..SolveOptions::default()
    }
}

fn validated<C: Coefficient>(spec: &EquationSpec<C>) -> Result<(), CliError> {
    spec.validate(VALIDATION_EPS).map_err(CliError::from)
}

fn run_solve(p: &Problem, real: bool) -> Result<AnySolveReport, CliError> {
    let opts = options(p, real);
    Ok(match &p.equation {
        Equation::Exact(spec) => {
            validated(spec)?;
            solve_auto(spec, &opts)?
        }
        Equation::Float(spec) => {
            validated(spec)?;
            AnySolveReport::Float(solve(spec, &opts)?)
        }
    })
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values always serialize")
}

/// Writes to stdout; a closed pipe on the reading side is not an error.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn cmd_solve(file: &Path, real: bool) -> Result<(), CliError> {
    let p = problem::load(file)?;
    let report = run_solve(&p, real)?;
    let passed = report.passed(p.tolerance);
    let mut out = report.to_json();
    out["passed"] = Value::Bool(passed);
    emit(&format!("{}\n", pretty(&out)));
    if passed {
        Ok(())
    } else {
        Err(CliError::VerificationFailed(format!(
            "solution does not satisfy the equation within tolerance {:e}",
            p.tolerance
        )))
    }
}

fn parse_range(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("--range expects start:end:count, got {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else { return Err(bad()) };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    Ok(match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    })
}

fn format_value(re: f64, im: f64) -> String {
    if im.abs() <= 1e-12 * re.abs().max(1.0) {
        format!("{re:.16e}")
    } else {
        let sign = if im < 0.0 { '-' } else { '+' };
        format!("{re:.16e}{sign}{:.16e}i", im.abs())
    }
}

fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    let points = match &args.range {
        Some(r) => parse_range(r)?,
        None => args.t.clone(),
    };
    if points.is_empty() {
        return Err(CliError::Usage("no evaluation points; pass --t or --range".into()));
    }
    let p = problem::load(&args.file)?;
    let report = run_solve(&p, args.real)?;
    if !report.evaluable() {
        return Err(CliError::Solve(
            "solution has a part with no function-space realization".into(),
        ));
    }
    let mut out = String::from("t,value,bound\n");
    for t in points {
        let r = report.eval(t)?;
        out.push_str(&format!(
            "{t:.16e},{},{:.16e}\n",
            format_value(r.value.re, r.value.im),
            r.truncation_bound
        ));
    }
    emit(&out);
    Ok(())
}

fn verify_as<C: Coefficient>(spec: &EquationSpec<C>, series: &Value, tolerance: f64) -> Result<Value, CliError> {
    validated(spec)?;
    let mut obj = series.clone();
    if let Some(map) = obj.as_object_mut() {
        map.entry("nu").or_insert(Value::from(spec.nu));
    }
    let series = FormalSeries::<C>::from_json(&obj).map_err(|e| CliError::Schema(e.to_string()))?;
    let v = verify(spec, &series)?;
    let passed = v.passed(&spec.leading_coefficients(), tolerance);
    Ok(json!({
        "exact": C::EXACT,
        "residual_norm": v.residual_norm,
        "relative_residual": v.relative_residual,
        "ic_errors": v.ic_errors,
        "passed": passed,
    }))
}

fn cmd_verify(file: &Path, series_file: &Path) -> Result<(), CliError> {
    let p = problem::load(file)?;
    let text = std::fs::read_to_string(series_file)
        .map_err(|e| CliError::Io(format!("{}: {e}", series_file.display())))?;
    let series: Value = serde_json::from_str(&text).map_err(|e| CliError::InvalidJson(e.to_string()))?;
    let out = match &p.equation {
        Equation::Exact(spec) => verify_as(spec, &series, p.tolerance)?,
        Equation::Float(spec) => verify_as(spec, &series, p.tolerance)?,
    };
    emit(&format!("{}\n", pretty(&out)));
    if out["passed"] == Value::Bool(true) {
        Ok(())
    } else {
        Err(CliError::VerificationFailed("series does not satisfy the equation".into()))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve { file, real } => cmd_solve(&file, real),
        Command::Eval(args) => cmd_eval(&args),
        Command::Table { nu } => {
            emit(&format!("{}\n", pretty(&table_json(nu))));
            Ok(())
        }
        Command::Verify { file, series } => cmd_verify(&file, &series),
    }
}

fn report_error(e: &CliError) -> ExitCode {
    let body = json!({"error": {"code": e.code(), "message": e.to_string()}});
    eprintln!("{body}");
    ExitCode::from(e.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            emit(&e.to_string());
            return ExitCode::SUCCESS;
        }
        Err(e) => return report_error(&CliError::Usage(e.to_string().trim_end().to_string())),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report_error(&e),
    }
}
