//! `qpir-lab`: drives the two-server QPIR simulator, the security
//! auditor, the converse-bound checkers, and the classical baseline, and
//! emits machine-readable reports.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or config validation
//! failure. Reports are JSON (UTF-8, lower_snake_case keys) or CSV
//! ('.' decimal, ',' separator, mandatory header row); identical config
//! and seed reproduce byte-identical files.

mod commands;
mod report;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qpir-lab", version, about = "Two-server QPIR simulator and verification toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the retrieval protocol and record transcripts.
    Run(RunArgs),
    /// Audit error probability, server secrecy, and user secrecy.
    Audit(AuditArgs),
    /// Check the single-round and multi-round converse bounds.
    Converse(ConverseArgs),
    /// Compare against classical PIR capacities and costs.
    Compare(CompareArgs),
    /// Verify that the generalized Bell basis is orthonormal.
    BasisCheck(BasisCheckArgs),
    /// Sampled check of the entropic inequality on cq states with pure
    /// conditionals.
    Lemma3(Lemma3Args),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exhaustive,
    Sampled,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Variant {
    Honest,
    SingletonLeak,
}

#[derive(Args)]
struct RunArgs {
    /// Qudit dimension ℓ (file values live in Z_ℓ²).
    #[arg(long)]
    ell: u64,
    /// Number of files F.
    #[arg(long)]
    files: usize,
    #[arg(long, value_enum, default_value = "exhaustive")]
    mode: Mode,
    /// Seed for sampled mode; QPIR_LAB_SEED is the fallback.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of sampled runs.
    #[arg(long, default_value_t = 100)]
    trials: u64,
    /// Include post-state amplitudes in each transcript.
    #[arg(long)]
    dump_state: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long)]
    ell: u64,
    #[arg(long)]
    files: usize,
    /// Query strategy: the protocol's, or the deliberately leaky control.
    #[arg(long, value_enum, default_value = "honest")]
    variant: Variant,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct ConverseArgs {
    #[arg(long)]
    ell: u64,
    #[arg(long, default_value_t = 2)]
    files: usize,
    /// Order-parameter grid as start:end:step.
    #[arg(long, default_value = "0.1:0.9:0.1")]
    s_grid: String,
    /// Check the R-round entropic bound instead of the single-round curve.
    #[arg(long)]
    multiround: Option<usize>,
    /// Per-round targets for --multiround, comma separated (default:
    /// cycle through 1..=F).
    #[arg(long)]
    targets: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct CompareArgs {
    /// Number of servers N for the classical formulas.
    #[arg(long, default_value_t = 2)]
    n: u64,
    #[arg(long)]
    files: u64,
    /// File-size parameter ℓ for the matched-alphabet columns.
    #[arg(long, default_value_t = 2)]
    ell: u64,
    /// Sweep N over a:b (inclusive), one row per N.
    #[arg(long)]
    sweep_n: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct BasisCheckArgs {
    #[arg(long)]
    ell: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Lemma3Args {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Command failure with its process exit code.
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn validation(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<qpir_core::Error> for CliError {
    fn from(e: qpir_core::Error) -> Self {
        use qpir_core::Error::*;
        match e {
            InvalidParam(_) | EnumerationCap(_) | IndexOutOfRange(_) => {
                CliError::validation(e.to_string())
            }
            _ => CliError::runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::runtime(e.to_string())
    }
}

/// Seed precedence: flag, then QPIR_LAB_SEED, then 0.
fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("QPIR_LAB_SEED") {
        Ok(text) => text
            .parse()
            .map_err(|_| CliError::validation(format!("QPIR_LAB_SEED = {text:?} is not a u64"))),
        Err(_) => Ok(0),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => commands::run(args),
        Command::Audit(args) => commands::audit(args),
        Command::Converse(args) => commands::converse(args),
        Command::Compare(args) => commands::compare(args),
        Command::BasisCheck(args) => commands::basis_check(args),
        Command::Lemma3(args) => commands::lemma3(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
