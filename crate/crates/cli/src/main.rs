//! `cmlab`: batch evaluation, degree estimation and identity verification.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

#[derive(Parser, Debug)]
#[command(name = "cmlab", version, about = "High-precision remainders, kernels and completely monotonic degrees")]
struct Cli {
    /// Working precision in significant decimal digits.
    #[arg(long, global = true, default_value_t = 50)]
    digits: u32,
    /// Output format; `eval` defaults to csv, the other commands to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Significant digits of every printed number.
    #[arg(long, global = true, default_value_t = 25)]
    sig: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate a function on a log-spaced grid.
    Eval(EvalArgs),
    /// Bracket the completely monotonic degree of a function family.
    Degree(DegreeArgs),
    /// Run identity suites and report one record per check.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// lngamma, psi, polygamma:m, R:n, R1:n (−R_n′), R2:n (R_n″), f:n, K:m or phi.
    #[arg(long = "fn")]
    pub func: String,
    /// `a:b:n`, n log-spaced points from a to b; `a:a:1` is a single point.
    #[arg(long)]
    pub grid: String,
}

#[derive(Args, Debug)]
pub struct DegreeArgs {
    /// lnminuspsi, phi, negR1prime, R:n, negRprime:n or dR:n:m ((−1)^m R_n^{(m)}).
    #[arg(long = "fn", conflicts_with = "conjecture", required_unless_present = "conjecture")]
    pub func: Option<String>,
    /// Probe the conjectured degree of (−1)^m R_n^{(m)}, given as `n:m`.
    #[arg(long)]
    pub conjecture: Option<String>,
    /// Lower end of the bracket; must pass.
    #[arg(long, requires = "func")]
    pub lo: Option<f64>,
    /// Upper end of the bracket; must fail.
    #[arg(long, requires = "func")]
    pub hi: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub resolution: f64,
    /// Highest derivative order J checked.
    #[arg(long, default_value_t = 8)]
    pub order: u32,
    #[arg(long, default_value = "1e-3:1e3:400")]
    pub grid: String,
    /// Sign tolerance; defaults to 10^(−digits/2).
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Comma-separated suites: bose, laprep, k2chain, ksigns, sinkernel,
    /// zetabound, taillimits, binet, psiint, stirling, fseries, or all.
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// Override every check's tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Also search (0, 30] for a negative p = 4 sin-kernel integral.
    #[arg(long)]
    pub find_negative: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Numeric(#[from] cmlab::Error),
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::ChecksFailed(_) => 1,
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Numeric(cmlab::Error::Bracket(_)) => 4,
            CliError::Numeric(_) => 3,
        }
    }
}

/// Global settings shared by the commands.
pub struct Global {
    pub ctx: cmlab::PrecisionContext,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub sig: usize,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let ctx = cmlab::PrecisionContext::new(cli.digits).map_err(|e| CliError::Usage(e.to_string()))?;
    let default_format = match cli.command {
        Command::Eval(_) => Format::Csv,
        _ => Format::Json,
    };
    let g = Global {
        ctx,
        format: cli.format.unwrap_or(default_format),
        out: cli.out,
        sig: cli.sig.max(1),
    };
    match &cli.command {
        Command::Eval(a) => commands::eval(&g, a),
        Command::Degree(a) => commands::degree(&g, a),
        Command::Verify(a) => commands::verify(&g, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cmlab: {e}");
            ExitCode::from(e.code())
        }
    }
}
