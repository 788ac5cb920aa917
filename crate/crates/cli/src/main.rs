//! `exactflow`: certify, measure and probe explicit Euler and
//! Navier-Stokes solutions.

mod commands;
mod output;
mod spec;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, spec files or parameters: exit code 2.
    #[error("{0}")]
    Usage(String),
    /// The command ran and its checks failed: exit code 1.
    #[error("{0}")]
    Failed(String),
}

#[derive(Parser)]
#[command(
    name = "exactflow",
    version,
    about = "Certify explicit Euler and Navier-Stokes solutions",
    after_help = "Expressions use + - * / ^, parentheses, numbers and the functions exp ln sqrt sin cos atan. \
                  abs and sign are not available: write squared moduli such as |xi|^2 as xi^2."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ListFormat {
    Table,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum BlowupNorm {
    Sup,
    Lq,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProbeMode {
    Affine,
    Twinwave,
}

#[derive(Args)]
struct CertifyArgs {
    /// Preset id or path of a JSON spec file.
    source: String,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol_residual: Option<f64>,
    #[arg(long)]
    tol_div: Option<f64>,
    #[arg(long)]
    tol_fd: Option<f64>,
    #[arg(long)]
    tol_vort: Option<f64>,
    /// Sample times up to this fraction of the blow-up time.
    #[arg(long)]
    until: Option<f64>,
    /// Distance kept from the singular set.
    #[arg(long)]
    exclusion: Option<f64>,
    /// Pressure sign of the half-space family, 1 or -1.
    #[arg(long, allow_negative_numbers = true)]
    pressure_sign: Option<f64>,
    /// Worker threads; the report does not depend on this.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NormArgs {
    source: String,
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    /// Inner radius of the annulus.
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    /// Outer radius of the annulus (default: infinity).
    #[arg(long = "R", allow_negative_numbers = true)]
    outer: Option<f64>,
    /// Box `lo1 hi1 lo2 hi2 [lo3 hi3]` instead of an annulus.
    #[arg(long = "box", num_args = 4..=6, allow_negative_numbers = true)]
    bounds: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    t: f64,
    /// Measure `u - C` with `C` the registered far-field velocity. Without a
    /// domain this is the energy over the whole plane.
    #[arg(long)]
    subtract_boost: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BlowupArgs {
    source: String,
    #[arg(long, value_enum, default_value_t = BlowupNorm::Sup)]
    norm: BlowupNorm,
    /// Number of sample times.
    #[arg(long = "K", default_value_t = 10)]
    samples: usize,
    /// Sample times are `T (1 - 2^-k)` from this `k` on.
    #[arg(long, default_value_t = 10)]
    k_start: u32,
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long = "R", default_value_t = 2.0)]
    outer: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProbeArgs {
    #[arg(long, value_enum)]
    mode: ProbeMode,
    #[arg(long, allow_hyphen_values = true)]
    v1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    v2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    u1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    u2: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    c1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c3: Option<f64>,
    #[arg(long, num_args = 2, allow_negative_numbers = true)]
    lower: Option<Vec<f64>>,
    #[arg(long, num_args = 2, allow_negative_numbers = true)]
    upper: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    t_start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t_end: Option<f64>,
    /// Grid nodes per spatial axis.
    #[arg(long)]
    n: Option<usize>,
    /// Grid time levels.
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridDumpArgs {
    source: String,
    /// `lo1 hi1 lo2 hi2 [lo3 hi3]`.
    #[arg(long = "box", num_args = 4..=6, allow_negative_numbers = true, required = true)]
    bounds: Vec<f64>,
    #[arg(long, default_value_t = 32)]
    nx: usize,
    #[arg(long, default_value_t = 3)]
    nt: usize,
    #[arg(long, allow_negative_numbers = true)]
    t_start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t_end: Option<f64>,
    #[arg(long)]
    exclusion: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Show the preset catalog.
    List {
        #[arg(long, value_enum, default_value_t = ListFormat::Table)]
        format: ListFormat,
    },
    /// Sample residuals and finite-difference checks; exit 0 on pass, 1 on fail.
    Certify(CertifyArgs),
    /// L^q norm over an annulus or box, or the energy of `u - C`.
    Norm(NormArgs),
    /// Fit the power law of a norm approaching the blow-up time.
    Blowup(BlowupArgs),
    /// Grid residual of an affine or twin-wave candidate.
    Probe(ProbeArgs),
    /// Velocity, residual and divergence on a regular grid, as CSV.
    GridDump(GridDumpArgs),
    /// Write the spec file of a preset.
    Export {
        preset: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::List { format } => commands::list(matches!(format, ListFormat::Json)),
        Command::Certify(a) => commands::certify(a),
        Command::Norm(a) => commands::norm(a),
        Command::Blowup(a) => commands::blowup(a),
        Command::Probe(a) => commands::probe(a),
        Command::GridDump(a) => commands::grid_dump(a),
        Command::Export { preset, out } => commands::export(&preset, out.as_deref()),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Failed(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
