//! `fracpow`: fractional powers and Dirichlet-to-Neumann limits from the
//! command line. Reports go to stdout (or `--out`) as JSON or CSV.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 bad input, 3 a check or
//! acceptance criterion failed.

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::Outcome;

#[derive(Parser, Debug)]
#[command(name = "fracpow", version, about = "Fractional powers of non-negative operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// A^α x by the Balakrishnan integral, checked against the spectral oracle when one exists.
    Power(RunArgs),
    /// U(t)x and U'(t)x on the grid t0·ratio^k.
    Extend(RunArgs),
    /// Extrapolated Dirichlet-to-Neumann limit compared with c_α A^α x.
    Dtn(RunArgs),
    /// Every route side by side with pairwise discrepancies.
    Compare(RunArgs),
    /// Samples ‖λ(λ+A)^{-1}‖ to estimate the non-negativity constant.
    Validate(ValidateArgs),
    /// Runs the acceptance suite; exits 3 unless every criterion passes.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall time per stage (makes reports run-dependent).
    #[arg(long)]
    timings: bool,
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// Operator JSON file, or a built-in name (identity, laplacian, hpd_dense, jordan, multiplication, sector_multiplication).
    #[arg(long)]
    op: String,
    /// Fractional order as `re` or `re,im`, with 0 < re < 1.
    #[arg(long, value_parser = input::parse_order, allow_hyphen_values = true)]
    alpha: fracpow::FractionalOrder,
    /// Input vector: a file, a JSON array of reals or [re, im] pairs, or comma-separated reals. Defaults to all ones.
    #[arg(long, allow_hyphen_values = true)]
    vector: Option<String>,
    #[arg(long, default_value_t = 1e-8, value_parser = input::parse_positive)]
    tol: f64,
    /// Largest t of the extrapolation grid.
    #[arg(long, default_value_t = 1.0, value_parser = input::parse_positive)]
    t0: f64,
    /// Grid ratio in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    ratio: f64,
    /// Number of grid points.
    #[arg(long, default_value_t = 8)]
    steps: usize,
    /// Smallest shift 2^-J used by the shifted-limit route of `compare`.
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(i32).range(4..=40))]
    shift_depth: i32,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
struct ValidateArgs {
    #[arg(long)]
    op: String,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
struct SelftestArgs {
    #[arg(long, default_value_t = fracpow::acceptance::DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, output) = match &cli.command {
        Command::Power(a) => (commands::power(a), &a.output),
        Command::Extend(a) => (commands::extend(a), &a.output),
        Command::Dtn(a) => (commands::dtn(a), &a.output),
        Command::Compare(a) => (commands::compare(a), &a.output),
        Command::Validate(a) => (commands::validate(a), &a.output),
        Command::Selftest(a) => (commands::selftest(a), &a.output),
    };
    match result.and_then(|outcome| emit(&outcome, output).map(|_| outcome.pass)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("fracpow: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn emit(outcome: &Outcome, output: &OutputArgs) -> Result<(), input::CliError> {
    let text = match output.format {
        Format::Json => outcome.json.clone(),
        Format::Csv => outcome.csv.clone(),
    };
    match &output.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| input::CliError::usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
