//! Command line driver: builds the algebras, runs verification suites, and
//! emits canonical JSON report documents.
//!
//! stdout carries exactly one report document per run; stderr carries human
//! diagnostics. Exit codes: 0 all gating checks passed (or were skipped),
//! 1 at least one gating check failed, 2 the configuration was rejected
//! before any check ran.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use cartanlie::cartan::{build_h, build_k, build_s, build_w, ContactAlgebra, Subalgebra};
use cartanlie::derivations::{WAlgebra, DEFAULT_FLAT_CAP};
use cartanlie::dpalgebra::{DPoly, Shape};
use cartanlie::field::Field;
use cartanlie::generation::{witness_h, witness_k, witness_s, WitnessError};
use cartanlie::grammar::{format_deriv, format_poly, parse_deriv, parse_poly};
use cartanlie::report::{Report, Status};
use cartanlie::suites::{run_suite, SuiteConfig, SUITE_NAMES};

const DIM_CAP_ENV: &str = "CARTANLIE_DIM_CAP";

#[derive(Parser)]
#[command(
    name = "cartanlie",
    version,
    about = "Graded Cartan-type Lie algebras over small finite fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print dimensions, grading table, and codimensions for one algebra
    Info(CommonArgs),
    /// Run verification suites and aggregate their reports
    Verify(CommonArgs),
    /// Construct a commuting witness for an element of the admissible set
    Witness(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Algebra family
    #[arg(long = "type", value_parser = ["W", "S", "H", "K"], default_value = "W")]
    family: String,

    /// Base field characteristic (prime, at least 5)
    #[arg(long, default_value_t = 5)]
    p: u64,

    /// Number of variables; defaults to the family's desk-scale shape
    #[arg(long)]
    m: Option<usize>,

    /// Comma-separated heights n_1,...,n_m
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u32>>,

    /// Root seed for all sampled checks
    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Base sample count; suites scale their volumes from it
    #[arg(long, default_value_t = 200)]
    samples: usize,

    /// Splitting field degree bound for decompositions
    #[arg(long = "max-ext", default_value_t = 24)]
    max_ext: u32,

    /// Comma-separated suite selection for verify (default: all)
    #[arg(long, value_delimiter = ',')]
    suite: Option<Vec<String>>,

    /// Write the report document to this file instead of stdout
    #[arg(long)]
    out: Option<std::path::PathBuf>,

    /// Element in the text grammar (witness only)
    #[arg(long)]
    elem: Option<String>,

    /// Record wall clock per check; timed documents are not byte-comparable
    #[arg(long, default_value_t = false)]
    timings: bool,
}

#[derive(Serialize)]
struct ConfigEcho {
    command: String,
    #[serde(rename = "type")]
    family: String,
    p: u64,
    m: usize,
    n: Vec<u32>,
    seed: u64,
    samples: usize,
    max_ext: u32,
    dim_cap: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    suites: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    elem: Option<String>,
}

#[derive(Serialize)]
struct ReportDocument {
    schema: u32,
    version: &'static str,
    config: ConfigEcho,
    checks: Vec<Report>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timings_ms: Option<BTreeMap<String, u128>>,
    overall: Status,
}

/// Worst status among the gating reports. Reports tagged `gating = false`
/// are informational and never affect the exit code.
fn overall(checks: &[Report]) -> Status {
    checks
        .iter()
        .filter(|r| r.parameters.get("gating").map(String::as_str) != Some("false"))
        .map(|r| r.status)
        .max()
        .unwrap_or(Status::Pass)
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = Cli::parse();
    let (label, args) = match &cli.command {
        Command::Info(a) => ("info", a),
        Command::Verify(a) => ("verify", a),
        Command::Witness(a) => ("witness", a),
    };
    match dispatch(label, args) {
        Ok(doc) => {
            let status = doc.overall;
            let value = serde_json::to_value(&doc).expect("reports serialize");
            let text = serde_json::to_string_pretty(&value).expect("json renders");
            match &args.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text + "\n") {
                        eprintln!("cannot write {}: {e}", path.display());
                        return 2;
                    }
                    eprintln!("report written to {}", path.display());
                }
                None => {
                    let mut stdout = std::io::stdout().lock();
                    let _ = writeln!(stdout, "{text}");
                }
            }
            if status.is_ok() {
                0
            } else {
                1
            }
        }
        Err(msg) => {
            eprintln!("configuration error: {msg}");
            2
        }
    }
}

fn dim_cap_from_env() -> Result<usize, String> {
    match std::env::var(DIM_CAP_ENV) {
        Ok(raw) => raw
            .trim()
            .parse::<usize>()
            .map_err(|_| format!("{DIM_CAP_ENV} must be a positive integer, got `{raw}`")),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_FLAT_CAP),
        Err(e) => Err(format!("{DIM_CAP_ENV}: {e}")),
    }
}

/// Desk-scale shape for a family when -m / -n are not given.
fn default_shape(family: &str) -> (usize, Vec<u32>) {
    match family {
        "K" => (3, vec![1, 1, 1]),
        _ => (2, vec![1, 1]),
    }
}

fn resolve_shape(args: &CommonArgs) -> Result<(usize, Vec<u32>), String> {
    let (dm, dn) = default_shape(&args.family);
    let m = args.m.unwrap_or(dm);
    let n = match &args.n {
        Some(n) => n.clone(),
        None => {
            if args.m.is_some() {
                vec![1; m]
            } else {
                dn
            }
        }
    };
    if n.len() != m {
        return Err(format!("--n lists {} heights but --m is {m}", n.len()));
    }
    Ok((m, n))
}

fn dispatch(label: &str, args: &CommonArgs) -> Result<ReportDocument, String> {
    let dim_cap = dim_cap_from_env()?;
    let (m, n) = resolve_shape(args)?;
    let config = ConfigEcho {
        command: label.to_string(),
        family: args.family.clone(),
        p: args.p,
        m,
        n: n.clone(),
        seed: args.seed,
        samples: args.samples,
        max_ext: args.max_ext,
        dim_cap,
        suites: args.suite.clone(),
        elem: args.elem.clone(),
    };
    let started = Instant::now();
    let (checks, mut timings) = match label {
        "info" => (cmd_info(args, &n, dim_cap)?, None),
        "verify" => cmd_verify(args, dim_cap)?,
        "witness" => (cmd_witness(args, &n, dim_cap)?, None),
        _ => unreachable!("clap restricts the command set"),
    };
    if args.timings {
        let map = timings.get_or_insert_with(BTreeMap::new);
        map.insert(format!("{label}_total"), started.elapsed().as_millis());
    } else {
        timings = None;
    }
    Ok(ReportDocument {
        schema: 1,
        version: env!("CARGO_PKG_VERSION"),
        config,
        overall: overall(&checks),
        checks,
        timings_ms: timings,
    })
}

/// Records per-degree dimensions of a graded subalgebra.
fn grading_evidence(report: &mut Report, algebra: &Subalgebra) {
    if let Some(components) = algebra.components() {
        for (degree, space) in components {
            report.note(&format!("component_dim_{degree}"), space.dim() as i64);
        }
    }
}

fn family_label(letter: &str, shape: &Shape) -> String {
    let inner: Vec<String> = shape.heights().iter().map(u32::to_string).collect();
    format!("{}({},({}))", letter, shape.vars(), inner.join(","))
}

fn cmd_info(args: &CommonArgs, n: &[u32], dim_cap: usize) -> Result<Vec<Report>, String> {
    let field = Field::new(args.p, 1).map_err(|e| e.to_string())?;
    let shape = Shape::new(args.p, n).map_err(|e| e.to_string())?;
    let mut report = Report::new("algebra_info")
        .param("type", &args.family)
        .evidence("dim_o", shape.dim() as i64);
    match args.family.as_str() {
        "W" => {
            let w = WAlgebra::with_cap(&shape, &field, dim_cap).map_err(|e| e.to_string())?;
            let ww = build_w(&w);
            report = report.param("algebra", family_label("W", &shape));
            report.note("dim", w.dim() as i64);
            grading_evidence(&mut report, &ww);
        }
        "S" => {
            let w = WAlgebra::with_cap(&shape, &field, dim_cap).map_err(|e| e.to_string())?;
            let (s, s1, cs) = build_s(&w);
            report = report.param("algebra", family_label("S", &shape));
            report.note("dim_s", s.dim() as i64);
            report.note("dim_s1", s1.dim() as i64);
            report.note("dim_cs", cs.dim() as i64);
            report.note("codim_s1_in_s", (s.dim() - s1.dim()) as i64);
            grading_evidence(&mut report, &s1);
        }
        "H" => {
            if shape.vars() % 2 != 0 {
                return Err("type H needs an even number of variables".to_string());
            }
            let w = WAlgebra::with_cap(&shape, &field, dim_cap).map_err(|e| e.to_string())?;
            let (h, h2) = build_h(&w);
            report = report.param("algebra", family_label("H", &shape));
            report.note("dim_h", h.dim() as i64);
            report.note("dim_h2", h2.dim() as i64);
            grading_evidence(&mut report, &h2);
        }
        "K" => {
            if shape.vars() % 2 != 1 || shape.vars() < 3 {
                return Err("type K needs an odd number of variables, at least 3".to_string());
            }
            let k = ContactAlgebra::with_cap(&shape, &field, dim_cap).map_err(|e| e.to_string())?;
            let (kk, k1) = build_k(&k);
            report = report.param("algebra", family_label("K", &shape));
            report.note("dim_k", kk.dim() as i64);
            report.note("dim_k1", k1.dim() as i64);
            report.note("codim_k1_in_k", (kk.dim() - k1.dim()) as i64);
            grading_evidence(&mut report, &k1);
        }
        other => return Err(format!("unknown type `{other}`")),
    }
    Ok(vec![report.status(Status::Pass)])
}

type VerifyOutput = (Vec<Report>, Option<BTreeMap<String, u128>>);

fn cmd_verify(args: &CommonArgs, dim_cap: usize) -> Result<VerifyOutput, String> {
    let cfg = SuiteConfig {
        p: args.p,
        seed: args.seed,
        samples: args.samples,
        max_ext: args.max_ext,
        dim_cap,
    };
    let selected: Vec<String> = match &args.suite {
        Some(list) => list.clone(),
        None => SUITE_NAMES.iter().map(|s| s.to_string()).collect(),
    };
    let mut checks = Vec::new();
    let mut timings = BTreeMap::new();
    for name in &selected {
        let t = Instant::now();
        let reports = run_suite(name, &cfg).map_err(|e| e.to_string())?;
        timings.insert(name.clone(), t.elapsed().as_millis());
        checks.extend(reports);
    }
    for check in &checks {
        let gating = check.parameters.get("gating").map(String::as_str) != Some("false");
        let marker = if gating { "" } else { " (non-gating)" };
        eprintln!("{:<28} {}{marker}", check.name, check.status);
    }
    Ok((checks, args.timings.then_some(timings)))
}

fn cmd_witness(args: &CommonArgs, n: &[u32], dim_cap: usize) -> Result<Vec<Report>, String> {
    let elem = args
        .elem
        .as_deref()
        .ok_or_else(|| "witness requires --elem".to_string())?;
    let field = Field::new(args.p, 1).map_err(|e| e.to_string())?;
    let shape = Shape::new(args.p, n).map_err(|e| e.to_string())?;
    let report = match args.family.as_str() {
        "S" => {
            let d = parse_deriv(&shape, &field, elem).map_err(|e| e.to_string())?;
            let mut r = Report::new("witness_s")
                .param("type", "S")
                .param("input", format_deriv(&d));
            match witness_s(&d) {
                Ok(wit) => {
                    let delta = &wit.delta;
                    r = r
                        .witness(format!("f = {}", format_poly(&wit.constant)))
                        .witness(format!("Delta = {}", format_deriv(delta)))
                        .evidence("commutes", delta.bracket(&d).is_zero() as i64)
                        .evidence("divergence_zero", delta.divergence().is_zero() as i64)
                        .evidence("delta_min_degree", delta.min_degree().unwrap_or(0))
                        .status(Status::Pass);
                    eprintln!("Delta = {}", format_deriv(delta));
                    eprintln!("[D,Delta] = 0: {}", delta.bracket(&d).is_zero());
                    eprintln!("div(Delta) = 0: {}", delta.divergence().is_zero());
                    r
                }
                Err(e) => witness_failure(r, &e),
            }
        }
        "H" => {
            let f = parse_poly(&shape, &field, elem).map_err(|e| e.to_string())?;
            if shape.vars() % 2 != 0 {
                return Err("type H needs an even number of variables".to_string());
            }
            let mut r = Report::new("witness_h")
                .param("type", "H")
                .param("input", format_poly(&f));
            match witness_h(&f) {
                Ok(wit) => {
                    let delta = &wit.delta;
                    let d = cartanlie::cartan::hamiltonian_deriv(&f);
                    r = r
                        .witness(format!("cube = {}", format_poly(&wit.cube)))
                        .witness(format!("Delta = {}", format_deriv(delta)))
                        .evidence("commutes", delta.bracket(&d).is_zero() as i64)
                        .evidence("delta_min_degree", delta.min_degree().unwrap_or(0))
                        .status(Status::Pass);
                    eprintln!("Delta = {}", format_deriv(delta));
                    eprintln!("[D,Delta] = 0: {}", delta.bracket(&d).is_zero());
                    r
                }
                Err(e) => witness_failure(r, &e),
            }
        }
        "K" => {
            let f = parse_poly(&shape, &field, elem).map_err(|e| e.to_string())?;
            if shape.vars() % 2 != 1 || shape.vars() < 3 {
                return Err("type K needs an odd number of variables, at least 3".to_string());
            }
            let k = ContactAlgebra::with_cap(&shape, &field, dim_cap).map_err(|e| e.to_string())?;
            let mut r = Report::new("witness_k")
                .param("type", "K")
                .param("input", format_poly(&f));
            match witness_k(&k, &f) {
                Ok(wit) => {
                    r = r
                        .evidence("dim_centraliser", wit.full.dim() as i64)
                        .evidence("dim_centraliser_filtered", wit.filtered.dim() as i64)
                        .status(Status::Pass);
                    eprintln!(
                        "centraliser dim {} / filtered to degree >= 1 dim {}",
                        wit.full.dim(),
                        wit.filtered.dim()
                    );
                    for row in wit.filtered.basis_rows() {
                        let g = DPoly::from_vec(&shape, &field, row);
                        r = r.witness(format_poly(&g));
                        eprintln!("  {}", format_poly(&g));
                    }
                    r
                }
                Err(e) => witness_failure(r, &e),
            }
        }
        other => return Err(format!("witness requires type S, H, or K, got `{other}`")),
    };
    Ok(vec![report])
}

fn witness_failure(report: Report, err: &WitnessError) -> Report {
    eprintln!("witness construction failed: {err}");
    report.param("error", err.to_string()).status(Status::Fail)
}
