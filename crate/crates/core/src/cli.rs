//! `alphag` command-line front end.
//!
//! Every failure prints one line `error[<code>]: <message>` to stderr and
//! exits nonzero:
//!
//! | exit | codes                                             |
//! |------|---------------------------------------------------|
//! | 1    | `usage`, `io`, `parse`                            |
//! | 2    | `eval`, `not-riemannian`, `negative-ds2`, `path`  |
//! | 3    | `disagreement`                                    |
//! | 4    | `no-convergence` (the result is still printed)    |
//! | 5    | `selftest`                                        |

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::algebra::{AlgebraError, AlphaNumber};
use crate::dsl::parse_metric_file;
use crate::geodesic::{
    alpha_length, find_geodesic, read_path_csv, riemannian_length, write_path_csv, GeodesicError,
    GeodesicResult, SolverOptions, DEFAULT_DS2_TOL,
};
use crate::metric::{
    classify, default_samples, eval_ds2_expanded, eval_ds2_grouped, Ds2Report, MetricClass,
    MetricKind, MetricTensor, DEFAULT_CLASSIFY_TOL,
};
use crate::point::{Displacement4, Point4};
use crate::selftest::{self, MulFn};

#[derive(Debug, Parser)]
#[command(
    name = "alphag",
    version,
    about = "Alpha-group line elements, metric classification and geodesics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Riemannian,
    Alpha,
}

/// Table corruptions used to exercise the self-test failure path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Fault {
    /// Multiply as if `μ² = 0`.
    MuSquaredZero,
    /// Multiply as if `i² = +1`.
    ISquaredOne,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate ds² at a point for a displacement (expanded and grouped).
    Eval {
        #[arg(long)]
        metric: PathBuf,
        #[arg(long, value_parser = parse_tuple, allow_hyphen_values = true)]
        point: [f64; 4],
        #[arg(long = "d", value_parser = parse_tuple, allow_hyphen_values = true)]
        d: [f64; 4],
        #[arg(long, default_value_t = DEFAULT_CLASSIFY_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Classify a metric as GENERAL_ALPHA, RIEMANNIAN_PATTERN or EUCLIDEAN_PATTERN.
    Classify {
        #[arg(long)]
        metric: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CLASSIFY_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Length of a polyline read from CSV.
    Length {
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        path_in: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Riemannian)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Geodesic between two points by polyline length minimisation.
    Geodesic {
        #[arg(long)]
        metric: PathBuf,
        #[arg(long, value_parser = parse_tuple, allow_hyphen_values = true)]
        from: [f64; 4],
        #[arg(long, value_parser = parse_tuple, allow_hyphen_values = true)]
        to: [f64; 4],
        #[arg(long, default_value_t = 32)]
        segments: usize,
        /// Write the optimised path as CSV.
        #[arg(long)]
        path_out: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-5)]
        fd_step: f64,
        #[arg(long, default_value_t = 0.1)]
        learning_rate: f64,
        #[arg(long, default_value_t = 1e-10)]
        rel_tol: f64,
        /// Classification tolerance.
        #[arg(long, default_value_t = DEFAULT_CLASSIFY_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run the randomised invariant suite.
    Selftest {
        #[arg(long, default_value_t = selftest::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = selftest::DEFAULT_CASES)]
        cases: usize,
        #[arg(long, value_enum, hide = true)]
        fault: Option<Fault>,
    },
}

/// Parses `a,b,c,d`; missing trailing components are 0.
fn parse_tuple(s: &str) -> Result<[f64; 4], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() > 4 {
        return Err(format!(
            "expected at most 4 components, got {}",
            parts.len()
        ));
    }
    let mut out = [0.0; 4];
    for (k, part) in parts.iter().enumerate() {
        let v: f64 = part
            .parse()
            .map_err(|_| format!("component {} (`{part}`) is not a number", k + 1))?;
        if !v.is_finite() {
            return Err(format!("component {} is not finite", k + 1));
        }
        out[k] = v;
    }
    Ok(out)
}

struct Failure {
    code: &'static str,
    exit: i32,
    message: String,
}

impl Failure {
    fn new(code: &'static str, exit: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            exit,
            message: message.into(),
        }
    }
}

impl From<GeodesicError> for Failure {
    fn from(e: GeodesicError) -> Self {
        let code = match &e {
            GeodesicError::NotRiemannian { .. } => "not-riemannian",
            GeodesicError::NegativeSquaredLength { .. } => "negative-ds2",
            GeodesicError::TooFewPoints(_)
            | GeodesicError::CoincidentPoints(_)
            | GeodesicError::Csv(_) => "path",
            _ => "eval",
        };
        Failure::new(code, 2, e.to_string())
    }
}

impl From<crate::metric::MetricError> for Failure {
    fn from(e: crate::metric::MetricError) -> Self {
        Failure::new("eval", 2, e.to_string())
    }
}

impl From<AlgebraError> for Failure {
    fn from(e: AlgebraError) -> Self {
        Failure::new("eval", 2, e.to_string())
    }
}

/// Runs the CLI with explicit argument list and output streams; returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let text = e.to_string();
            let first = text
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            let _ = writeln!(err, "error[usage]: {first}");
            return 1;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(f) => {
            let message = f.message.replace('\n', " ");
            let _ = writeln!(err, "error[{}]: {message}", f.code);
            f.exit
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::Eval {
            metric,
            point,
            d,
            tol,
            format,
        } => cmd_eval(&metric, point, d, tol, format, out),
        Command::Classify {
            metric,
            tol,
            format,
        } => cmd_classify(&metric, tol, format, out),
        Command::Length {
            metric,
            path_in,
            mode,
            format,
        } => cmd_length(&metric, &path_in, mode, format, out),
        Command::Geodesic {
            metric,
            from,
            to,
            segments,
            path_out,
            max_iter,
            fd_step,
            learning_rate,
            rel_tol,
            tol,
            format,
        } => {
            let opts = SolverOptions {
                max_iterations: max_iter,
                fd_step,
                learning_rate,
                rel_tol,
                classify_tol: tol,
                ..SolverOptions::default()
            };
            cmd_geodesic(
                &metric,
                from,
                to,
                segments,
                path_out.as_deref(),
                &opts,
                format,
                out,
                err,
            )
        }
        Command::Selftest { seed, cases, fault } => cmd_selftest(seed, cases, fault, out),
    }
}

fn load_metric(path: &Path) -> Result<(Option<String>, MetricTensor), Failure> {
    let source = fs::read_to_string(path)
        .map_err(|e| Failure::new("io", 1, format!("{}: {e}", path.display())))?;
    let def = parse_metric_file(&source)
        .map_err(|e| Failure::new("parse", 1, format!("{}: {e}", path.display())))?;
    Ok((def.name.clone(), MetricTensor::from(def)))
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string(value).map_err(|e| Failure::new("io", 1, e.to_string()))?;
    emit(out, &text)
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    writeln!(out, "{text}").map_err(|e| Failure::new("io", 1, e.to_string()))
}

fn to_point(v: [f64; 4]) -> Result<Point4, Failure> {
    Point4::from_array(v).map_err(|e| Failure::new("usage", 1, e.to_string()))
}

#[derive(Serialize)]
struct EvalReport {
    #[serde(flatten)]
    ds2: Ds2Report,
    expanded: AlphaNumber,
    grouped: AlphaNumber,
}

fn cmd_eval(
    metric: &Path,
    point: [f64; 4],
    d: [f64; 4],
    tol: f64,
    format: Format,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let (_, g) = load_metric(metric)?;
    let p = to_point(point)?;
    let d = Displacement4::from_array(d).map_err(|e| Failure::new("usage", 1, e.to_string()))?;
    let expanded = eval_ds2_expanded(&g, &p, &d)?;
    let grouped = eval_ds2_grouped(&g, &p, &d)?;
    let scale = expanded
        .to_array()
        .iter()
        .chain(grouped.to_array().iter())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let diff = expanded.max_abs_diff(&grouped);
    if diff > selftest::IDENTITY_TOL * scale {
        return Err(Failure::new(
            "disagreement",
            3,
            format!("expanded {expanded} and grouped {grouped} differ by {diff:e}"),
        ));
    }
    let class = classify(&g, &default_samples(), tol)?;
    let report = EvalReport {
        ds2: Ds2Report::new(grouped, class.kind),
        expanded,
        grouped,
    };
    match format {
        Format::Json => emit_json(out, &report)?,
        Format::Text => emit(
            out,
            &format!(
                "ds2 (expanded) = {expanded}\nds2 (grouped)  = {grouped}\nclass = {}",
                class.kind
            ),
        )?,
        Format::Csv => emit(
            out,
            &format!(
                "real,i,mu,imu,class\n{},{},{},{},{}",
                grouped.a(),
                grouped.b(),
                grouped.c(),
                grouped.d(),
                class.kind
            ),
        )?,
    }
    Ok(0)
}

#[derive(Serialize)]
struct ClassifyReport {
    metric: Option<String>,
    class: MetricKind,
    tol: f64,
    offending: Vec<String>,
}

impl ClassifyReport {
    fn new(name: Option<String>, class: &MetricClass) -> Self {
        Self {
            metric: name,
            class: class.kind,
            tol: class.tol,
            offending: class
                .offending
                .iter()
                .map(|(r, c)| format!("g{r}{c}"))
                .collect(),
        }
    }
}

fn cmd_classify(
    metric: &Path,
    tol: f64,
    format: Format,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let (name, g) = load_metric(metric)?;
    let class = classify(&g, &default_samples(), tol)?;
    let report = ClassifyReport::new(name, &class);
    match format {
        Format::Json => emit_json(out, &report)?,
        Format::Text => {
            let mut text = report.class.to_string();
            if !report.offending.is_empty() {
                let label = if class.kind == MetricKind::GeneralAlpha {
                    "nonzero"
                } else {
                    "not unit"
                };
                text.push_str(&format!(" ({label}: {})", report.offending.join(", ")));
            }
            emit(out, &text)?
        }
        Format::Csv => emit(
            out,
            &format!(
                "class,tol,offending\n{},{},{}",
                report.class,
                report.tol,
                report.offending.join(" ")
            ),
        )?,
    }
    Ok(0)
}

#[derive(Serialize)]
struct LengthReport {
    mode: &'static str,
    segments: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    real_length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    length: Option<AlphaNumber>,
}

fn cmd_length(
    metric: &Path,
    path_in: &Path,
    mode: Mode,
    format: Format,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let (_, g) = load_metric(metric)?;
    let file = fs::File::open(path_in)
        .map_err(|e| Failure::new("io", 1, format!("{}: {e}", path_in.display())))?;
    let path = read_path_csv(file)?;
    let report = match mode {
        Mode::Riemannian => LengthReport {
            mode: "riemannian",
            segments: path.segments(),
            real_length: Some(riemannian_length(&g, &path, DEFAULT_DS2_TOL)?),
            length: None,
        },
        Mode::Alpha => LengthReport {
            mode: "alpha",
            segments: path.segments(),
            real_length: None,
            length: Some(alpha_length(&g, &path)?),
        },
    };
    match format {
        Format::Json => emit_json(out, &report)?,
        Format::Text | Format::Csv => {
            let value = match (report.real_length, report.length) {
                (Some(r), _) => r.to_string(),
                (_, Some(a)) => a.to_string(),
                _ => unreachable!(),
            };
            emit(out, &value)?
        }
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_geodesic(
    metric: &Path,
    from: [f64; 4],
    to: [f64; 4],
    segments: usize,
    path_out: Option<&Path>,
    opts: &SolverOptions,
    format: Format,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    let (_, g) = load_metric(metric)?;
    let result: GeodesicResult = find_geodesic(&g, to_point(from)?, to_point(to)?, segments, opts)?;
    if let Some(p) = path_out {
        let file = fs::File::create(p)
            .map_err(|e| Failure::new("io", 1, format!("{}: {e}", p.display())))?;
        write_path_csv(&result.path, file)?;
    }
    match format {
        Format::Json => emit_json(out, &result)?,
        Format::Text => emit(
            out,
            &format!(
                "real_length = {}\nalpha_length = {}\niterations = {}\nconverged = {}",
                result.real_length, result.length, result.iterations, result.converged
            ),
        )?,
        Format::Csv => {
            let mut buf = Vec::new();
            write_path_csv(&result.path, &mut buf)?;
            out.write_all(&buf)
                .map_err(|e| Failure::new("io", 1, e.to_string()))?;
        }
    }
    if !result.converged {
        let _ = writeln!(
            err,
            "error[no-convergence]: stopped after {} iterations without converging",
            result.iterations
        );
        return Ok(4);
    }
    Ok(0)
}

fn faulty_mul(fault: Fault) -> MulFn {
    fn mu_squared_zero(x: AlphaNumber, y: AlphaNumber) -> Result<AlphaNumber, AlgebraError> {
        let (a, b, c, d) = (x.a(), x.b(), x.c(), x.d());
        let (e, f, g, h) = (y.a(), y.b(), y.c(), y.d());
        AlphaNumber::new(
            a * e - b * f,
            a * f + b * e,
            a * g + c * e - b * h - d * f,
            a * h + b * g + c * f + d * e,
        )
    }
    fn i_squared_one(x: AlphaNumber, y: AlphaNumber) -> Result<AlphaNumber, AlgebraError> {
        let (a, b, c, d) = (x.a(), x.b(), x.c(), x.d());
        let (e, f, g, h) = (y.a(), y.b(), y.c(), y.d());
        AlphaNumber::new(
            a * e + b * f,
            a * f + b * e,
            a * g + c * e + c * g + b * h + d * f + d * h,
            a * h + b * g + c * f + c * h + d * e + d * g,
        )
    }
    match fault {
        Fault::MuSquaredZero => mu_squared_zero,
        Fault::ISquaredOne => i_squared_one,
    }
}

fn cmd_selftest(
    seed: u64,
    cases: usize,
    fault: Option<Fault>,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let mul = fault.map_or(AlphaNumber::checked_mul as MulFn, faulty_mul);
    let report = selftest::run_with(seed, cases, mul);
    let mut text = format!("selftest seed={seed} cases={cases}");
    for c in &report.checks {
        match &c.counterexample {
            None => text.push_str(&format!("\nPASS {}", c.name)),
            Some(cx) => text.push_str(&format!("\nFAIL {}: {cx}", c.name)),
        }
    }
    emit(out, &text)?;
    if report.passed() {
        Ok(0)
    } else {
        Err(Failure::new(
            "selftest",
            5,
            format!(
                "{} of {} checks failed",
                report.failures(),
                report.checks.len()
            ),
        ))
    }
}
