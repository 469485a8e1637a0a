//! `pfint`: measures, integrals and dyadic approximations from the command line.

use clap::{Parser, Subcommand};
use pfint::backends::{BackendConfig, Corrupted, GeneratorBackend};
use pfint::extension::{ExtendedMeasure, MeasureError};
use pfint::functions::{dyadic_approx, Fun};
use pfint::integration::{integrate, IntegralResult, IntegrateOptions, IntegrationError};
use pfint::selftest::run_suite;
use pfint::syntax::{parse_fun, parse_term, print_term, SyntaxError};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

const OUTPUT_VERSION: u32 = 1;

const EXIT_FAILURE: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_BACKEND: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "pfint", version, about = "Point-free measure and integration engine")]
struct Cli {
    /// Backend configuration (JSON); the standard Gaussian measure if omitted.
    #[arg(long, global = true)]
    backend: Option<PathBuf>,
    /// Target width of the reported enclosure.
    #[arg(long, global = true, default_value_t = 1e-6)]
    eps: f64,
    /// Maximum truncation depth of countable operations.
    #[arg(long, global = true, default_value_t = 30)]
    budget: u64,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Also write the JSON result to this file.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enclose the measure of a set.
    Measure { set: String },
    /// Enclose the integral of a non-negative function.
    Integrate {
        fun: String,
        /// Highest dyadic ladder level.
        #[arg(long, default_value_t = 12)]
        level: u32,
        /// Declared almost-everywhere upper bound of the function.
        #[arg(long)]
        bound: Option<f64>,
    },
    /// Print the parts of the n-th dyadic simple approximation.
    Approx {
        fun: String,
        #[arg(long, default_value_t = 4)]
        level: u64,
    },
    /// Run the invariant suites against the backend.
    Selftest {
        /// Square every generator measure, breaking additivity.
        #[arg(long)]
        corrupt: bool,
    },
}

struct Failure {
    code: u8,
    body: Value,
}

impl Failure {
    fn new(code: u8, kind: &str, message: String) -> Failure {
        Failure {
            code,
            body: json!({ "version": OUTPUT_VERSION, "error": { "kind": kind, "message": message } }),
        }
    }

    fn syntax(e: SyntaxError) -> Failure {
        let pos = e.pos().clone();
        let mut f = Failure::new(EXIT_PARSE, "syntax", e.to_string());
        f.body["error"]["line"] = json!(pos.line);
        f.body["error"]["column"] = json!(pos.col);
        f
    }
}

impl From<MeasureError> for Failure {
    fn from(e: MeasureError) -> Failure {
        match e {
            MeasureError::Backend(_) => Failure::new(EXIT_BACKEND, "backend", e.to_string()),
            MeasureError::BudgetExhausted { .. } => Failure::new(EXIT_BUDGET, "budget", e.to_string()),
            MeasureError::Term(_) => Failure::new(EXIT_FAILURE, "term", e.to_string()),
        }
    }
}

fn load_backend(path: &Option<PathBuf>) -> Result<Arc<dyn GeneratorBackend>, Failure> {
    let cfg = match path {
        None => BackendConfig::gaussian(),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Failure::new(EXIT_BACKEND, "backend", format!("{}: {e}", p.display())))?;
            BackendConfig::from_json(&text).map_err(|e| Failure::new(EXIT_BACKEND, "backend", e.to_string()))?
        }
    };
    cfg.build().map_err(|e| Failure::new(EXIT_BACKEND, "backend", e.to_string()))
}

/// `null` stands for `+∞`.
fn number(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn result_json(lo: f64, hi: f64, converged: bool, effort: u64) -> Value {
    json!({
        "version": OUTPUT_VERSION,
        "lo": number(lo),
        "hi": number(hi),
        "converged": converged,
        "effort": effort,
    })
}

fn integral_json(r: &IntegralResult) -> Value {
    result_json(r.lo, r.hi, r.converged, r.effort)
}

fn parse_function(src: &str) -> Result<Fun, Failure> {
    parse_fun(src).map_err(Failure::syntax)
}

fn run(cli: &Cli) -> Result<(u8, Value), Failure> {
    match &cli.command {
        Command::Measure { set } => {
            let t = parse_term(set).map_err(Failure::syntax)?;
            let mu = ExtendedMeasure::new(load_backend(&cli.backend)?);
            match mu.eval_measure(&t, cli.eps, cli.budget) {
                Ok(r) => Ok((0, result_json(r.lo, r.hi, true, r.effort))),
                Err(MeasureError::BudgetExhausted { best }) => {
                    Ok((EXIT_BUDGET, result_json(best.lo, best.hi, false, best.effort)))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Integrate { fun, level, bound } => {
            let f = parse_function(fun)?;
            let mu = ExtendedMeasure::new(load_backend(&cli.backend)?);
            let opts = IntegrateOptions {
                eps: cli.eps,
                budget: cli.budget,
                max_level: *level,
                bound: *bound,
            };
            match integrate(&f, &mu, &opts) {
                Ok(r) => Ok((0, integral_json(&r))),
                Err(IntegrationError::BudgetExhausted { best }) => Ok((EXIT_BUDGET, integral_json(&best))),
                Err(e @ IntegrationError::UnboundedTail { best }) => {
                    eprintln!("{e}");
                    Ok((EXIT_BUDGET, integral_json(&best)))
                }
                Err(IntegrationError::Measure(e)) => Err(e.into()),
                Err(e) => Err(Failure::new(EXIT_FAILURE, "integration", e.to_string())),
            }
        }
        Command::Approx { fun, level } => {
            let f = parse_function(fun)?;
            let s = dyadic_approx(&f, *level);
            let parts: Vec<Value> = s
                .parts
                .iter()
                .map(|(a, x)| json!({ "set": print_term(a), "value": x.to_string(), "approx": number(x.to_f64()) }))
                .collect();
            Ok((0, json!({ "version": OUTPUT_VERSION, "level": level, "parts": parts })))
        }
        Command::Selftest { corrupt } => {
            let mut backend = load_backend(&cli.backend)?;
            if *corrupt {
                backend = Arc::new(Corrupted(backend));
            }
            let report = run_suite(backend, cli.seed);
            for c in &report.checks {
                eprintln!("{} {} ({} cases) {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.cases, c.detail);
            }
            let code = if report.passed() { 0 } else { EXIT_FAILURE };
            let mut body = serde_json::to_value(&report).expect("report serializes");
            body["version"] = json!(OUTPUT_VERSION);
            body["passed"] = json!(report.passed());
            Ok((code, body))
        }
    }
}

fn emit(cli: &Cli, body: &Value) -> Result<(), String> {
    let text = serde_json::to_string_pretty(body).expect("json value serializes");
    println!("{text}");
    if let Some(path) = &cli.json {
        std::fs::write(path, format!("{text}\n")).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_FAILURE } else { 0 });
        }
    };
    let (code, body) = match run(&cli) {
        Ok(out) => out,
        Err(f) => {
            if let Some(msg) = f.body["error"]["message"].as_str() {
                eprintln!("error: {msg}");
            }
            (f.code, f.body)
        }
    };
    if let Err(e) = emit(&cli, &body) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_FAILURE);
    }
    ExitCode::from(code)
}
