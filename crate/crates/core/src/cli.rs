//! Command-line front end.
//!
//! Exit codes: 0 success, 1 input error, 2 PIT budget failure, 3 model
//! inconsistency found in oracle mode.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::error::{IdentError, OracleError, PitError};
use crate::identify::{report_dot, run_identification, IdentConfig, IdentReport};
use crate::model::TreeScm;
use crate::oracle::{check_report, oracle_run, OracleReport, ORACLE_MAX_N};
use crate::pit::{DEFAULT_ERROR_PROB, DEFAULT_PRIME};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_INCONSISTENT: i32 = 3;

/// Parameter magnitude of the oracle's ground-truth draws.
const ORACLE_BOUND: i64 = 1_000_000_000;
/// Fresh ground-truth draws tried before a degenerate point is reported.
const ORACLE_ATTEMPTS: u64 = 8;

#[derive(Parser, Debug)]
#[command(name = "treeid", version, about = "Identify structural parameters of tree-shaped linear SCMs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide identifiability of every edge coefficient of a model.
    Identify(RunConfig),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(clap::Args, Debug, Clone)]
pub struct RunConfig {
    /// Model file: JSON `{"n", "parent", "bidirected"}` or DOT.
    pub input: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Target overall error probability, as a number or `2^-k`.
    #[arg(long, value_parser = parse_probability, default_value = "2^-40")]
    pub error_prob: f64,
    #[arg(long, default_value_t = DEFAULT_PRIME)]
    pub prime: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Cross-check statuses against the exact solver (n ≤ 8).
    #[arg(long)]
    pub oracle_check: bool,
    /// Write the equation graph in DOT format to this file.
    #[arg(long, value_name = "PATH")]
    pub emit_dot: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, short, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

fn parse_probability(s: &str) -> Result<f64, String> {
    let v = match s.trim().strip_prefix("2^") {
        Some(exp) => {
            let e: i32 = exp.parse().map_err(|_| format!("bad exponent in {s:?}"))?;
            2f64.powi(e)
        }
        None => s.parse().map_err(|_| format!("not a probability: {s:?}"))?,
    };
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("error probability must lie in (0, 1), got {v}"))
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: PathBuf::new(),
            seed: 0,
            error_prob: DEFAULT_ERROR_PROB,
            prime: DEFAULT_PRIME,
            format: Format::Json,
            oracle_check: false,
            emit_dot: None,
            output: None,
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<IdentError> for Failure {
    fn from(e: IdentError) -> Self {
        let code = match e {
            IdentError::Pit(PitError::InvalidParameters(_)) => EXIT_INPUT,
            IdentError::Pit(_) => EXIT_BUDGET,
            IdentError::Model(_) => EXIT_INPUT,
            // a vanishing denominator or broken contract means Σ does not
            // behave like a model covariance
            IdentError::Contract(_) | IdentError::DegeneratePropagation { .. } => EXIT_INCONSISTENT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Result of an oracle cross-check, rendered into the report.
struct OracleStamp {
    oracle: OracleReport,
    mismatches: Vec<(usize, &'static str, crate::oracle::SolutionCount)>,
}

fn oracle_stamp(m: &TreeScm, report: &IdentReport, seed: u64) -> Result<OracleStamp, Failure> {
    if m.n() > ORACLE_MAX_N {
        return Err(Failure::input(format!(
            "--oracle-check supports n <= {ORACLE_MAX_N}, model has n = {}",
            m.n()
        )));
    }
    let mut last = None;
    for attempt in 0..ORACLE_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        match oracle_run(m, &mut rng, ORACLE_BOUND) {
            Ok((_, oracle)) => {
                let mismatches = check_report(report, &oracle);
                return Ok(OracleStamp { oracle, mismatches });
            }
            Err(OracleError::Degenerate(msg)) => last = Some(msg),
            Err(e) => {
                return Err(Failure {
                    code: EXIT_INCONSISTENT,
                    message: format!("oracle: {e}"),
                })
            }
        }
    }
    Err(Failure {
        code: EXIT_INCONSISTENT,
        message: format!("oracle: every ground-truth draw was degenerate: {}", last.unwrap_or_default()),
    })
}

fn render(report: &IdentReport, stamp: Option<&OracleStamp>, format: Format) -> String {
    match format {
        Format::Json => {
            let mut v = report.to_json_value();
            if let Some(s) = stamp {
                let counts: serde_json::Map<String, serde_json::Value> = report
                    .nodes
                    .iter()
                    .filter_map(|n| Some((n.node.to_string(), json!(s.oracle.count(n.node)?))))
                    .collect();
                v["oracle_check"] = json!({
                    "agree": s.mismatches.is_empty(),
                    "counts": counts,
                    "mismatches": s.mismatches.iter().map(|(node, status, count)| json!({
                        "node": node, "status": status, "count": count,
                    })).collect::<Vec<_>>(),
                });
            }
            let mut out = serde_json::to_string_pretty(&v).expect("report serializes");
            out.push('\n');
            out
        }
        Format::Text => {
            let mut out = report.to_text();
            if let Some(s) = stamp {
                if s.mismatches.is_empty() {
                    out.push_str("oracle check: agree\n");
                } else {
                    for (node, status, count) in &s.mismatches {
                        out.push_str(&format!("oracle check: node {node} is {status} but has {count} solutions\n"));
                    }
                }
            }
            out
        }
    }
}

/// Runs one identification and returns the rendered report and exit code.
pub fn execute(cfg: &RunConfig) -> (String, i32) {
    match execute_inner(cfg) {
        Ok(out) => out,
        Err(f) => {
            eprintln!("treeid: {}", f.message);
            (String::new(), f.code)
        }
    }
}

fn execute_inner(cfg: &RunConfig) -> Result<(String, i32), Failure> {
    let text = std::fs::read_to_string(&cfg.input)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", cfg.input.display())))?;
    let m = TreeScm::parse(&text).map_err(|e| Failure::input(format!("{}: {e}", cfg.input.display())))?;
    let ident = IdentConfig {
        seed: cfg.seed,
        prime: cfg.prime,
        error_prob: cfg.error_prob,
        ..IdentConfig::default()
    };
    let report = run_identification(&m, &ident)?;
    if let Some(path) = &cfg.emit_dot {
        let dot = report_dot(&m, &report)?;
        std::fs::write(path, dot).map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;
    }
    let stamp = if cfg.oracle_check {
        Some(oracle_stamp(&m, &report, cfg.seed)?)
    } else {
        None
    };
    let code = match &stamp {
        Some(s) if !s.mismatches.is_empty() || !report.anomalies.is_empty() => EXIT_INCONSISTENT,
        _ => EXIT_OK,
    };
    Ok((render(&report, stamp.as_ref(), cfg.format), code))
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Identify(cfg) => {
            let (out, code) = execute(&cfg);
            if out.is_empty() {
                return code;
            }
            let written = match &cfg.output {
                Some(path) => std::fs::write(path, &out),
                None => std::io::stdout().write_all(out.as_bytes()),
            };
            match written {
                Ok(()) => code,
                Err(e) => {
                    eprintln!("treeid: cannot write report: {e}");
                    EXIT_INPUT
                }
            }
        }
    }
}
