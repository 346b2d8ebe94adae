//! `tracenet`: analysis, chain construction, sampling and verification of
//! 1-safe Petri nets from the command line.
//!
//! Exit codes: 0 success, 1 verification or validation failure, 2 invalid
//! net or request, 3 net not 1-safe, 4 action not irreducible, 5 numeric
//! failure, 6 resource cap exceeded.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Analyze,
    Chain,
    Sample,
    Verify,
    Enumerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Jsonl,
    /// whitespace-separated firing sequence per run (sample only)
    Firings,
}

#[derive(Debug, Parser)]
#[command(
    name = "tracenet",
    version,
    about = "Uniform random executions of 1-safe Petri nets"
)]
pub struct Cli {
    pub command: Command,
    /// net description in JSON
    pub net: PathBuf,
    /// root isolation tolerance
    #[arg(long, default_value_t = 1e-12)]
    pub tolerance: f64,
    /// tolerance on probabilities, row sums and residuals
    #[arg(long, default_value_t = 1e-9)]
    pub probability_tolerance: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// cliques per sampled execution
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
    /// sampled executions; defaults to 1, or 100000 with --validate
    #[arg(long)]
    pub runs: Option<usize>,
    /// trace length for the chain-rule check
    #[arg(long, default_value_t = 2)]
    pub depth: usize,
    /// trace length for enumeration
    #[arg(long)]
    pub length: Option<usize>,
    /// series order for the inverse identity check
    #[arg(long, default_value_t = 10)]
    pub order: usize,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub no_timestamp: bool,
    #[arg(long, default_value_t = tracenet_core::petri_net::DEFAULT_MAX_STATES)]
    pub max_states: usize,
    /// longest trace any enumeration may reach
    #[arg(long, default_value_t = tracenet_core::trace_monoid::DEFAULT_MAX_TRACE_LENGTH)]
    pub max_length: usize,
    /// sample: compare empirical prefix frequencies with the measure instead of streaming
    #[arg(long)]
    pub validate: bool,
    /// verify: multiply Γ(S,T) by FACTOR before the measure checks, as S,T,FACTOR
    #[arg(long, value_parser = parse_corruption)]
    pub corrupt_gamma: Option<(usize, usize, f64)>,
}

fn parse_corruption(s: &str) -> Result<(usize, usize, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [a, b, f] = parts[..] else {
        return Err("expected S,T,FACTOR".into());
    };
    let err = |e: &dyn std::fmt::Display| e.to_string();
    Ok((
        a.trim().parse().map_err(|e| err(&e))?,
        b.trim().parse().map_err(|e| err(&e))?,
        f.trim().parse().map_err(|e| err(&e))?,
    ))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
