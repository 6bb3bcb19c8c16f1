//! `stet`: synthesise signals, compute concentrated time-frequency
//! representations, score them and resynthesise their components.
//!
//! Exit codes: 0 ok, 2 configuration error, 3 input error, 4 numeric
//! failure. Failures print one JSON line on stderr.

mod commands;
mod error;
mod manifest;
mod recipe;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "stet", version, about = "Synchro-transient extraction toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic signal as CSV.
    Synth(SynthArgs),
    /// Export one time-frequency representation and its routing.
    Analyze(AnalyzeArgs),
    /// Concentration report and optional noise sweep.
    Metrics(MetricsArgs),
    /// Split a signal into harmonic and impulsive parts.
    Reconstruct(ReconstructArgs),
}

/// Exactly one of `--input` or a recipe (`--tone`, `--lfm`, `--impulse`).
#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Signal file: `.wav`, or CSV with `time_s,real[,imag]`.
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Tone `A=..,w=..` (rad/s) or `A=..,f=..` (Hz); repeatable.
    #[arg(long, value_name = "SPEC")]
    pub tone: Vec<String>,
    /// Linear chirp `A=..,a=..,b=..,c=..` (phase, rad/s, rad/s²); repeatable.
    #[arg(long, value_name = "SPEC")]
    pub lfm: Vec<String>,
    /// Impulse `A=..,t0=..` (s); repeatable.
    #[arg(long, value_name = "SPEC")]
    pub impulse: Vec<String>,
    /// Sample rate of a recipe, Hz.
    #[arg(long, default_value_t = 1000.0)]
    pub fs: f64,
    /// Duration of a recipe, s.
    #[arg(long, default_value_t = 1.0)]
    pub dur: f64,
    /// Add white complex Gaussian noise at this SNR (dB), seeded by `--seed`.
    #[arg(long, value_name = "DB", allow_hyphen_values = true)]
    pub noise_snr: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChirpRule {
    Dual,
    TimeRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Band {
    Full,
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Bin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Stft,
    Set,
    Tet,
    Stet,
    Stet2,
}

/// Window and extraction parameters. Unset values take the defaults
/// echoed in `manifest.json`.
#[derive(Debug, Clone, Args)]
pub struct AnalysisArgs {
    /// Window parameter β in s² (`g(t) = exp(−t²/2β)`).
    #[arg(long, conflicts_with = "sigma_ms")]
    pub beta: Option<f64>,
    /// Window standard deviation in ms; `β = (σ/1000)²`.
    #[arg(long)]
    pub sigma_ms: Option<f64>,
    /// FFT length; defaults to the next power of two ≥ 4 window lengths.
    #[arg(long)]
    pub nfft: Option<usize>,
    /// Magnitude mask threshold relative to max |V|.
    #[arg(long, default_value_t = 1e-3)]
    pub gamma: f64,
    /// Chirp-rate boundary in rad/s²; defaults to β^(−2/3).
    #[arg(long)]
    pub boundary: Option<f64>,
    #[arg(long, value_enum, default_value_t = ChirpRule::Dual)]
    pub chirp_rule: ChirpRule,
    #[arg(long, value_enum, default_value_t = Band::Full)]
    pub band: Band,
    /// Run every stage on one thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Stet2)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Also export the IF, GD and chirp-rate estimate fields.
    #[arg(long)]
    pub fields: bool,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Stet2)]
    pub method: MethodArg,
    /// Rényi order α > 1.
    #[arg(long, default_value_t = stet::metrics::DEFAULT_RENYI_ORDER)]
    pub renyi_order: f64,
    /// Samples of the normalised energy curve.
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    /// Comma-separated SNRs (dB) at which to re-measure entropy.
    #[arg(long, value_name = "DB,..", value_delimiter = ',', allow_hyphen_values = true)]
    pub snr_sweep: Vec<f64>,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    /// Clean signal to score against; defaults to the analysed input.
    #[arg(long, value_name = "PATH")]
    pub reference: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Synth(a) => commands::synth(&a),
        Command::Analyze(a) => commands::analyze(&a),
        Command::Metrics(a) => commands::metrics(&a),
        Command::Reconstruct(a) => commands::reconstruct(&a),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind::*;
            if matches!(
                e.kind(),
                DisplayHelp | DisplayVersion | DisplayHelpOnMissingArgumentOrSubcommand
            ) {
                e.exit();
            }
            let msg = e.render().to_string();
            let first = msg
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            eprintln!("{}", CliError::config(first).line());
            std::process::exit(2);
        }
    };
    match run(cli) {
        Ok(summary) => println!("{summary}"),
        Err(e) => {
            eprintln!("{}", e.line());
            std::process::exit(e.code());
        }
    }
}
