//! `opseq`: synthesize or preprocess opcode corpora, train hyper-parameter
//! grids and rank hyper-parameter importance.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use opseq_core::ErrorKind;

#[derive(Debug, Parser)]
#[command(name = "opseq", version, about = "LSTM hyper-parameter importance on opcode sequences")]
struct Cli {
    /// Root for default input and output locations.
    #[arg(long, global = true, env = "OPSEQ_WORKSPACE", default_value = ".")]
    workspace: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic two-class corpus of `.asm` files plus manifest.csv.
    Synth(SynthArgs),
    /// Parse, filter, balance, encode and pad a corpus.
    Preprocess(PreprocessArgs),
    /// Train every config of a grid and append per-epoch rows to a results CSV.
    Grid(GridArgs),
    /// Rank hyper-parameters from a results CSV.
    Analyze(AnalyzeArgs),
    /// Summarize an analysis directory.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 400)]
    pub n_per_class: usize,
    #[arg(long, default_value_t = 16)]
    pub vocab_size: usize,
    #[arg(long, default_value_t = 40)]
    pub min_len: usize,
    #[arg(long, default_value_t = 120)]
    pub max_len: usize,
    /// Output directory [default: <workspace>/corpus]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Directory of `mal_*.asm` / `ben_*.asm` files.
    #[arg(long, conflicts_with = "manifest", required_unless_present = "manifest")]
    pub input: Option<PathBuf>,
    /// CSV with header `file_id,label,path`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub bins: usize,
    #[arg(long, default_value_t = 1.5)]
    pub iqr_mult_mal: f64,
    #[arg(long, default_value_t = 5.0)]
    pub iqr_mult_ben: f64,
    /// Output directory [default: <workspace>/prep]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Run manifest written by `preprocess` [default: <workspace>/prep/run.json]
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// key=value-list grid file; the full grid when omitted.
    #[arg(long)]
    pub grid_spec: Option<PathBuf>,
    /// Global seed [default: the manifest's seed]
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value_t = 24.0)]
    pub memory_budget_gb: f64,
    /// Epochs per config [default: the grid file's value, else 5]
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long, default_value = "f32", value_parser = ["f32", "f64"])]
    pub precision: String,
    /// Store measured wall time instead of 0 (makes output non-reproducible).
    #[arg(long)]
    pub record_wall_time: bool,
    /// Results CSV [default: the manifest's results path]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Results CSV [default: <workspace>/prep/results.csv]
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub min_support: usize,
    /// Output directory [default: <workspace>/prep/analysis]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Analysis directory [default: <workspace>/prep/analysis]
    #[arg(long)]
    pub input: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let ws = cli.workspace;
    let outcome = match cli.command {
        Command::Synth(a) => commands::synth(&ws, a),
        Command::Preprocess(a) => commands::preprocess(&ws, a),
        Command::Grid(a) => commands::grid(&ws, a),
        Command::Analyze(a) => commands::analyze(&ws, a),
        Command::Report(a) => commands::report(&ws, a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Config => 1,
                ErrorKind::Data | ErrorKind::Io => 2,
                ErrorKind::Internal => 3,
            })
        }
    }
}
