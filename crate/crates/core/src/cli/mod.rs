//! The `ershov` command line.

mod commands;
mod output;

use std::ffi::OsString;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::ordinal::{OrdinalLimits, DEFAULT_MAX_DEPTH};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Check(String),
    #[error("{0}")]
    Budget(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse(_) => 2,
            CliError::Check(_) => 3,
            CliError::Budget(_) => 4,
            CliError::Io(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Parse(_) => "parse",
            CliError::Check(_) => "check",
            CliError::Budget(_) => "budget",
            CliError::Io(_) => "io",
        }
    }

    /// The object printed on stderr.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Obj<'a> {
            error: &'a str,
            exit_code: i32,
            message: String,
        }
        serde_json::to_string(&Obj { error: self.kind(), exit_code: self.exit_code(), message: self.to_string() })
            .expect("plain strings serialize")
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Inclusive range of parameters, written `a..b`, `a..=b` or `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CRange {
    pub start: u64,
    pub end: u64,
}

impl CRange {
    pub fn iter(self) -> RangeInclusive<u64> {
        self.start..=self.end
    }
}

fn parse_c_range(s: &str) -> Result<CRange, String> {
    let num = |t: &str| t.trim().parse::<u64>().map_err(|e| format!("bad bound `{t}`: {e}"));
    let (start, end) = match s.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let v = num(s)?;
            (v, v)
        }
    };
    if start > end {
        return Err(format!("empty range {s}"));
    }
    Ok(CRange { start, end })
}

fn parse_window(s: &str) -> Result<u64, String> {
    match s.parse::<u64>() {
        Ok(0) => Err("window must be at least 1".into()),
        Ok(w) => Ok(w),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Parser)]
#[command(name = "ershov", version, about = "Ordinal-bounded limit approximations and their checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: Global,
}

/// Settings shared by every command.
#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Steps `w = 0..=W` to simulate.
    #[arg(long, global = true, default_value = "200", value_parser = parse_window)]
    pub window: u64,
    /// Parameters to run, e.g. `0..20` (inclusive).
    #[arg(long = "c-range", global = true, default_value = "0..20", value_parser = parse_c_range)]
    pub c_range: CRange,
    /// Format of the summary printed on stdout.
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long, global = true, default_value = "0")]
    pub seed: u64,
    /// Directory for trace files and reports.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Maximum nesting of `w^` in ordinal arguments.
    #[arg(long = "depth-cap", global = true, default_value_t = DEFAULT_MAX_DEPTH)]
    pub depth_cap: usize,
}

impl Global {
    pub fn limits(&self) -> OrdinalLimits {
        OrdinalLimits { max_depth: self.depth_cap, max_tower: self.depth_cap as u32 }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ordinal arithmetic on Cantor normal forms.
    Ordinal {
        #[command(subcommand)]
        op: OrdinalOp,
    },
    /// Simulate a witness pair for a spec on a range of parameters.
    Approximate(ApproximateArgs),
    /// Build and audit canonical derivations.
    Derive(DeriveArgs),
    /// Walk canonical derivations and extract `(f, h)`.
    Trace(TraceArgs),
    /// Compare the Boolean combination of `Y_k, N_k` with the observed limit.
    Decompose(DecomposeArgs),
    /// Nested limit of the least-tuple chain against brute force.
    Limr(LimrArgs),
    /// Re-check exported traces offline.
    Verify(VerifyArgs),
}

#[derive(Debug, Subcommand)]
pub enum OrdinalOp {
    /// Prints LT, EQ or GT.
    Cmp {
        a: String,
        b: String,
    },
    Add {
        a: String,
        b: String,
    },
    /// Left multiplication `n * a`.
    Scale {
        n: u64,
        a: String,
    },
    /// The tower `w_{1+n}`.
    Tower {
        n: u32,
    },
    /// Randomized order, addition and scaling laws, seeded by `--seed`.
    Props {
        #[arg(long, default_value = "10000")]
        cases: usize,
        #[arg(long = "max-depth", default_value = "4")]
        max_depth: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Herbrand,
    Baseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Delta2,
    Sigma2,
}

#[derive(Debug, Args)]
pub struct SpecSource {
    /// A `.d2` file, or `corpus:NAME` for a shipped instance.
    #[arg(long)]
    pub spec: String,
}

#[derive(Debug, Args)]
pub struct ApproximateArgs {
    #[command(flatten)]
    pub source: SpecSource,
    #[arg(long, value_enum, default_value = "herbrand")]
    pub method: Method,
    /// A `.d2` file holding a `herbrand { .. }` block; defaults to the one in the `--spec` file.
    #[arg(long)]
    pub certificate: Option<String>,
    /// Largest `a_i, b_i` tried when checking the certificate.
    #[arg(long = "cert-window", default_value = "24")]
    pub cert_window: u64,
    #[arg(long = "node-budget", default_value = "5000000")]
    pub node_budget: u64,
}

#[derive(Debug, Args)]
pub struct DeriveArgs {
    #[command(flatten)]
    pub source: SpecSource,
    /// A single parameter; overrides `--c-range`.
    #[arg(long)]
    pub c: Option<u64>,
    /// `auto` searches the least surviving candidate; a number fixes `X`.
    #[arg(long = "witness-bound", default_value = "auto")]
    pub witness_bound: String,
    #[arg(long, value_enum, default_value = "delta2")]
    pub mode: ModeArg,
    /// Largest candidate tried by `--witness-bound auto`.
    #[arg(long, default_value = "5000")]
    pub cap: u64,
    #[arg(long, default_value = "24")]
    pub depth: usize,
    #[arg(long, default_value = "12")]
    pub width: u64,
    #[arg(long, default_value = "20000")]
    pub nodes: u64,
    /// Depth and width of the JSONL node dump.
    #[arg(long = "dump-depth", default_value = "4")]
    pub dump_depth: usize,
    #[arg(long = "dump-width", default_value = "4")]
    pub dump_width: u64,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub source: SpecSource,
    #[arg(long, value_enum, default_value = "delta2")]
    pub mode: ModeArg,
    #[arg(long, default_value = "5000")]
    pub cap: u64,
    /// Steps to follow past the entry into the surviving block; defaults to the window.
    #[arg(long)]
    pub margin: Option<u64>,
    /// Hard limit on walk length.
    #[arg(long = "max-steps", default_value = "500000")]
    pub max_steps: u64,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub source: SpecSource,
    #[arg(long)]
    pub certificate: Option<String>,
}

#[derive(Debug, Args)]
pub struct LimrArgs {
    /// A `.d2` file declaring the predicate.
    #[arg(long)]
    pub phi: String,
    /// Which declaration to use; defaults to the last one.
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// CSV with columns `c,w,f,h`.
    #[arg(long)]
    pub pair: PathBuf,
    /// The claimed bound, as an ordinal.
    #[arg(long = "K")]
    pub k: Option<String>,
    /// Only check the bound and descent of `h`.
    #[arg(long = "skip-lowering")]
    pub skip_lowering: bool,
}

/// Parses `args` (including the program name) and runs the command, writing
/// the summary to `stdout`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            write!(stdout, "{e}")?;
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.kind().to_string() + ": " + e.to_string().trim())),
    };
    commands::dispatch(&cli, stdout)
}

/// Entry point for the binary: returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut stdout = std::io::stdout().lock();
    match run(args, &mut stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = stdout.flush();
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_c_range("0..20").unwrap(), CRange { start: 0, end: 20 });
        assert_eq!(parse_c_range("3..=5").unwrap(), CRange { start: 3, end: 5 });
        assert_eq!(parse_c_range("7").unwrap(), CRange { start: 7, end: 7 });
        assert!(parse_c_range("5..2").is_err());
        assert!(parse_window("0").is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
