//! `pmfix`: axiom audits, convergence analyses, Picard solves and the
//! incompleteness witness from the command line.
//!
//! Exit status: 0 when every requested check passes or certifies, 1 when a
//! check fails or a certificate is invalid, 2 on usage or domain errors.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use partial_metric::contraction::{FnMap, SelfMap, TableMap};
use partial_metric::convergence::{
    analyze_proper_convergence, analyze_tau_convergence, detect_cauchy, trace_csv, ConvergenceReport,
    SequenceTrace,
};
use partial_metric::solver::{picard_solve, FixedPointCertificate, SolveOptions};
use partial_metric::space::{audit_axioms, AxiomAuditReport};
use partial_metric::spaces::from_table;
use partial_metric::table::FiniteTable;
use partial_metric::witness::{audit_witness, WitnessAudit, WitnessMap};
use partial_metric::{Error, PartialMetric, PartialMetricSpace, Point};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "pmfix", version, about = "Fixed points and convergence in partial metric spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample triples and check the four partial-metric axioms.
    Audit(AuditArgs),
    /// Analyze convergence of a built-in sequence to an anchor point.
    Converge(ConvergeArgs),
    /// Run Picard iteration and emit a fixed-point certificate.
    Solve(SolveArgs),
    /// Audit the fixed-point-free map on ((0, 1], max).
    Witness(WitnessArgs),
    /// Halve from 1 on ([0, inf), max): certificate plus convergence table.
    Demo(DemoArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct Output {
    /// Artifact format. CSV is available for traces only.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the artifact here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AuditArgs {
    /// max, punctured, or table:<path>
    #[arg(long, default_value = "max")]
    space: String,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Absolute tolerance for each axiom.
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Sequence {
    /// x_n = 1/n
    Harmonic,
    /// x_n = 2^-n
    Halving,
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    /// max, punctured, or table:<path>
    #[arg(long, default_value = "max")]
    space: String,
    #[arg(long, value_enum, default_value_t = Sequence::Harmonic)]
    sequence: Sequence,
    /// Candidate limit x.
    #[arg(long, default_value_t = 0.0)]
    anchor: f64,
    /// Number of terms N.
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    horizon: u64,
    /// Tail window W.
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    window: u64,
    #[arg(long, default_value_t = 1e-9)]
    eps: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// max, punctured, or table:<path>
    #[arg(long, default_value = "max")]
    space: String,
    /// scale:<r> for t -> r t, or images:<i0,i1,...> on a table space.
    #[arg(long, default_value = "scale:0.5")]
    map: String,
    #[arg(long, default_value_t = 1.0)]
    x0: f64,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    max_iter: u64,
    #[arg(long, default_value_t = 1e-9)]
    eps: f64,
    /// Iterates in the proper-convergence trace attached to the certificate.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    horizon: u64,
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..))]
    window: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct WitnessArgs {
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Truncation depth for orbit diameters.
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    depth: u64,
    /// Fixed-point tolerance.
    #[arg(long, default_value_t = 1e-12)]
    eps: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct DemoArgs {
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    max_iter: u64,
    #[arg(long, default_value_t = 1e-9)]
    eps: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<bool, Failure>;

fn parse_space(spec: &str) -> Result<PartialMetricSpace, Failure> {
    match spec {
        "max" => Ok(PartialMetricSpace::MaxReals),
        "punctured" => Ok(PartialMetricSpace::PuncturedInterval),
        _ => match spec.strip_prefix("table:") {
            Some(path) => Ok(from_table(FiniteTable::load(path)?)?),
            None => Err(Failure::Usage(format!(
                "unknown space `{spec}`; expected max, punctured or table:<path>"
            ))),
        },
    }
}

fn parse_map(spec: &str, space: &PartialMetricSpace) -> Result<Box<dyn SelfMap>, Failure> {
    if let Some(r) = spec.strip_prefix("scale:") {
        let r: f64 = r
            .parse()
            .map_err(|_| Failure::Usage(format!("bad scale factor in `{spec}`")))?;
        if space.is_finite() {
            return Err(Failure::Usage("scale maps need an interval space".into()));
        }
        return Ok(Box::new(FnMap::scale(r)));
    }
    if let Some(list) = spec.strip_prefix("images:") {
        let images = list
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| Failure::Usage(format!("bad image list in `{spec}`")))?;
        match space.as_table() {
            Some(t) if t.len() == images.len() => return Ok(Box::new(TableMap::new(images)?)),
            Some(t) => {
                return Err(Failure::Usage(format!(
                    "image list has {} entries, table has {}",
                    images.len(),
                    t.len()
                )))
            }
            None => return Err(Failure::Usage("image maps need a table space".into())),
        }
    }
    Err(Failure::Usage(format!("unknown map `{spec}`; expected scale:<r> or images:<list>")))
}

fn emit(output: &Output, body: &str) -> Result<(), Failure> {
    match &output.out {
        Some(path) => fs::write(path, body).map_err(|e| Failure::Lib(e.into())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes()).map_err(|e| Failure::Lib(e.into()))
        }
    }
}

fn emit_json<T: Serialize>(output: &Output, value: &T) -> Result<(), Failure> {
    if output.format == Format::Csv {
        return Err(Failure::Usage("csv output is only available for traces (converge, demo)".into()));
    }
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    emit(output, &s)
}

#[derive(Serialize)]
struct AuditOut<'a> {
    space: String,
    seed: u64,
    tolerance: f64,
    #[serde(flatten)]
    report: &'a AxiomAuditReport,
}

fn audit(a: &AuditArgs) -> Outcome {
    let space = parse_space(&a.space)?;
    let report = audit_axioms(&space, a.trials as usize, a.seed, a.eps)?;
    emit_json(
        &a.output,
        &AuditOut {
            space: space.label(),
            seed: a.seed,
            tolerance: a.eps,
            report: &report,
        },
    )?;
    Ok(report.passed)
}

#[derive(Serialize)]
struct ConvergeOut {
    space: String,
    sequence: String,
    tau: ConvergenceReport,
    proper: ConvergenceReport,
    cauchy: ConvergenceReport,
}

fn sequence_term(s: Sequence) -> fn(usize) -> Point {
    match s {
        Sequence::Harmonic => |n| Point(1.0 / n as f64),
        Sequence::Halving => |n| Point(0.5f64.powi(n.min(i32::MAX as usize) as i32)),
    }
}

fn converge(a: &ConvergeArgs) -> Outcome {
    let space = parse_space(&a.space)?;
    let trace = SequenceTrace::new(&space, a.horizon as usize, sequence_term(a.sequence))?;
    let x = Point(a.anchor);
    let (w, eps) = (a.window as usize, a.eps);
    let proper = analyze_proper_convergence(&trace, x, w, eps)?;
    let certified = proper.certified();
    match a.output.format {
        Format::Csv => emit(&a.output, &trace_csv(&trace, Some(x))?)?,
        Format::Json => emit_json(
            &a.output,
            &ConvergeOut {
                space: space.label(),
                sequence: format!("{:?}", a.sequence).to_lowercase(),
                tau: analyze_tau_convergence(&trace, x, w, eps)?,
                proper,
                cauchy: detect_cauchy(&trace, w, eps)?,
            },
        )?,
    }
    Ok(certified)
}

#[derive(Serialize)]
struct SolveOut<'a> {
    space: String,
    map: String,
    x0: f64,
    certificate: &'a FixedPointCertificate,
}

fn solve(a: &SolveArgs) -> Outcome {
    let space = parse_space(&a.space)?;
    let f = parse_map(&a.map, &space)?;
    let opts = SolveOptions {
        max_iter: a.max_iter as usize,
        eps: a.eps,
        trace_horizon: a.horizon as usize,
        window: a.window as usize,
    };
    let cert = picard_solve(&space, f.as_ref(), Point(a.x0), opts)?;
    emit_json(
        &a.output,
        &SolveOut {
            space: space.label(),
            map: f.label(),
            x0: a.x0,
            certificate: &cert,
        },
    )?;
    Ok(cert.valid)
}

fn witness(a: &WitnessArgs) -> Outcome {
    let w = WitnessMap::new();
    let report: WitnessAudit = audit_witness(&w, a.samples as usize, a.seed, a.eps, a.depth as usize)?;
    emit_json(&a.output, &report)?;
    Ok(report.passed)
}

#[derive(Serialize)]
struct DemoRow {
    n: usize,
    x_n: f64,
    p_x_xn: f64,
    p_xn_xn: f64,
}

#[derive(Serialize)]
struct DemoOut<'a> {
    space: String,
    map: String,
    x0: f64,
    certificate: &'a FixedPointCertificate,
    table: Vec<DemoRow>,
}

fn demo(a: &DemoArgs) -> Outcome {
    let space = PartialMetricSpace::MaxReals;
    let f = FnMap::scale(0.5);
    let opts = SolveOptions {
        max_iter: a.max_iter as usize,
        eps: a.eps,
        ..SolveOptions::default()
    };
    let x0 = Point(1.0);
    let cert = picard_solve(&space, &f, x0, opts)?;
    let x_star = Point(cert.x_star);
    let trace = SequenceTrace::new(&space, opts.trace_horizon, |n| Point(0.5f64.powi(n as i32)))?;
    match a.output.format {
        Format::Csv => emit(&a.output, &trace_csv(&trace, Some(x_star))?)?,
        Format::Json => {
            let table = (1..=trace.horizon())
                .map(|n| {
                    let xn = trace.point(n);
                    DemoRow {
                        n,
                        x_n: xn.0,
                        p_x_xn: space.eval_unchecked(x_star, xn),
                        p_xn_xn: space.eval_unchecked(xn, xn),
                    }
                })
                .collect();
            emit_json(
                &a.output,
                &DemoOut {
                    space: space.label(),
                    map: f.label(),
                    x0: x0.0,
                    certificate: &cert,
                    table,
                },
            )?;
        }
    }
    Ok(cert.valid && cert.x_star.abs() <= a.eps)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Audit(a) => audit(a),
        Command::Converge(a) => converge(a),
        Command::Solve(a) => solve(a),
        Command::Witness(a) => witness(a),
        Command::Demo(a) => demo(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
