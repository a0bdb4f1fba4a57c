//! `prclab`: batch driver for the inequality checks and PRC experiments.
//!
//! Every subcommand is a pure function of its flags and `--seed`. Grid cells
//! run on a rayon pool capped by `PRCLAB_WORKERS`; results are collected in
//! grid order and written once at the end.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use output::Format;

#[derive(Parser, Debug, Serialize)]
#[command(
    name = "prclab",
    version,
    about = "Pseudorandom-code experiments and exact verifiers"
)]
pub struct Cli {
    /// Root seed; every cell and trial derives its randomness from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Instances (hyper) or trials per grid cell (other subcommands).
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Output file; stdout when absent.
    // Not echoed: reruns to different paths must produce identical bytes.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Random instances of the hypercontractive and collision inequalities.
    Hyper(HyperArgs),
    /// PRF-PRC completeness and soundness against the closed forms.
    PrcEval(PrcEvalArgs),
    /// Compiler completeness experiment with Bad1/Bad2 counts.
    Compile(CompileArgs),
    /// Closed-form bounds for the given parameters.
    Bounds(BoundsArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct HyperArgs {
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = (2..=10).collect::<Vec<usize>>())]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = vec![0.0, 0.25, 0.5, 0.75, 1.0])]
    pub rho: Vec<f64>,
    /// Maximum number of labels of the random randomized functions.
    #[arg(long, default_value_t = 6)]
    pub labels: u32,
}

#[derive(Args, Debug, Serialize)]
pub struct PrcEvalArgs {
    #[arg(long, default_value_t = 16)]
    pub lambda: usize,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = vec![0.0, 0.5, 0.9, 0.99])]
    pub rho: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = vec![4usize, 8, 16, 60])]
    pub ell: Vec<usize>,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = vec![16usize, 256, 4096])]
    pub blocks: Vec<usize>,
    /// Skip the Monte Carlo columns.
    #[arg(long)]
    pub closed_form_only: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    /// PRF-PRC with `--ell` and `--blocks`.
    Prf,
    /// One-query tagging scheme with `--k` prefix bits and `--pad` padding.
    Tag,
    /// Oracle-free scheme: the codeword is the key, decoding is a distance test.
    OracleFree,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeavyModeArg {
    Auto,
    Exact,
    MonteCarlo,
}

#[derive(Args, Debug, Serialize)]
pub struct CompileArgs {
    #[arg(long, value_enum, default_value_t = SchemeKind::Prf)]
    pub scheme: SchemeKind,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = vec![16usize])]
    pub lambda: Vec<usize>,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = vec![0.5])]
    pub rho: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = vec![0.2, 0.1, 0.05, 0.02])]
    pub tau: Vec<f64>,
    #[arg(long, default_value_t = 12)]
    pub ell: usize,
    #[arg(long, default_value_t = 64)]
    pub blocks: usize,
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub pad: usize,
    #[arg(long, value_enum, default_value_t = HeavyModeArg::Auto)]
    pub heavy_mode: HeavyModeArg,
    /// Monte Carlo probes per heavy-query search (default `ceil(100/tau)`).
    #[arg(long)]
    pub probes: Option<u64>,
}

#[derive(Args, Debug, Serialize)]
pub struct BoundsArgs {
    /// Completeness error of the scheme being compiled.
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 1)]
    pub q_bound: usize,
    #[arg(long, default_value_t = 0.1)]
    pub tau: f64,
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    #[arg(long, default_value_t = 1024)]
    pub n: usize,
    #[arg(long, default_value_t = 16)]
    pub lambda: usize,
    /// Exponent in `tau = lambda^-c`.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long, default_value_t = 8)]
    pub ell: usize,
    /// Defaults to `lambda^2`.
    #[arg(long)]
    pub blocks: Option<usize>,
    /// Samples per key in the leakage bound.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Key length in the leakage bound (defaults to `lambda`).
    #[arg(long)]
    pub key_bits: Option<usize>,
}

pub enum Failure {
    Usage(String),
    Violation(String),
    Io(String),
}

fn configure_pool() {
    if let Some(n) = std::env::var("PRCLAB_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        // Only fails if a global pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn main() -> ExitCode {
    let mut cli = Cli::parse();
    configure_pool();
    match commands::run(&mut cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Violation(msg)) => {
            eprintln!("violation: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
