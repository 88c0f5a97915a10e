//! secretsift command-line interface: argument surface and dispatch.
//!
//! Exit codes are part of the contract: 0 for a clean run, 1 when a scan
//! finds (classified) secrets, 2 for fatal errors. Reports are strictly
//! deterministic so CI can diff them.

pub mod commands;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use secretsift_core::context::DEFAULT_WINDOW_CHARS;
use secretsift_core::scanner::DEFAULT_MAX_FILE_BYTES;

#[derive(Debug, Parser)]
#[command(
    name = "secretsift",
    version,
    about = "Find candidate secrets with a regex catalog, then weigh them with a classifier"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scan a file or directory tree for candidate secrets
    Scan(ScanArgs),
    /// Score a labeled dataset against a classification backend
    Evaluate(EvaluateArgs),
    /// Cut a labeled dataset into train/validation/test files
    Split(SplitArgs),
    /// Write the fixed fine-tuning recipe for a model id
    EmitFinetuneConfig(EmitFinetuneConfigArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanBackendArg {
    Remote,
    Mock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalBackendArg {
    Remote,
    Mock,
    /// Regex-only floor: every candidate counts as a secret
    Baseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Binary,
    Multiclass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Balanced,
    Imbalanced,
    Multiclass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnparseableArg {
    /// Abort the evaluation (exit 2)
    Error,
    /// Count the answer as Non-sensitive
    NonSensitive,
    /// Count the answer as Secret
    Secret,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// File or directory to scan
    pub path: PathBuf,

    /// Pattern catalog JSON file (default: built-in catalog)
    #[arg(long)]
    pub catalog: Option<PathBuf>,

    /// Context window size in characters around each candidate
    #[arg(long, default_value_t = DEFAULT_WINDOW_CHARS)]
    pub context_chars: usize,

    /// Classify candidates with this backend (omit to just list matches)
    #[arg(long, value_enum)]
    pub classify: Option<ScanBackendArg>,

    /// Classification mode
    #[arg(long, value_enum, default_value_t = ModeArg::Binary)]
    pub mode: ModeArg,

    /// Labeled exemplars per prompt (0 = zero-shot, up to 8)
    #[arg(long, default_value_t = 0)]
    pub shots: usize,

    /// Report format
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    pub format: FormatArg,

    /// Mask matched secrets in the report (the default)
    #[arg(long, overrides_with = "no_redact")]
    pub redact: bool,

    /// Show matched secrets in full
    #[arg(long, overrides_with = "redact")]
    pub no_redact: bool,

    /// Write the report to this file instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Only scan paths matching one of these globs (repeatable)
    #[arg(long)]
    pub include: Vec<String>,

    /// Skip paths matching any of these globs (repeatable)
    #[arg(long)]
    pub exclude: Vec<String>,

    /// Per-file size cap in bytes (0 removes the cap)
    #[arg(long, default_value_t = DEFAULT_MAX_FILE_BYTES)]
    pub max_file_bytes: u64,

    /// Model id to request from the remote backend
    #[arg(long)]
    pub model: Option<String>,

    /// Maximum classification requests in flight
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    pub concurrency: u32,

    /// Exemplar bank JSON file replacing the built-in bank
    #[arg(long)]
    pub exemplars: Option<PathBuf>,
}

impl ScanArgs {
    /// `--redact` / `--no-redact` resolution; redaction defaults on.
    pub fn redaction(&self) -> bool {
        !self.no_redact
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Labeled dataset CSV
    #[arg(long)]
    pub dataset: PathBuf,

    /// Classification backend to score
    #[arg(long, value_enum, default_value_t = EvalBackendArg::Mock)]
    pub backend: EvalBackendArg,

    /// Classification mode
    #[arg(long, value_enum, default_value_t = ModeArg::Binary)]
    pub mode: ModeArg,

    /// Labeled exemplars per prompt (0 = zero-shot, up to 8)
    #[arg(long, default_value_t = 0)]
    pub shots: usize,

    /// What to do when a model answer parses to no label
    #[arg(long, value_enum, default_value_t = UnparseableArg::Error)]
    pub on_unparseable: UnparseableArg,

    /// Window size when contexts must be re-cut from files
    #[arg(long, default_value_t = DEFAULT_WINDOW_CHARS)]
    pub context_chars: usize,

    /// Report format
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    pub format: FormatArg,

    /// Write the report to this file instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Model id to request from the remote backend
    #[arg(long)]
    pub model: Option<String>,

    /// Maximum classification requests in flight
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    pub concurrency: u32,

    /// Exemplar bank JSON file replacing the built-in bank
    #[arg(long)]
    pub exemplars: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Labeled dataset CSV to split
    #[arg(long)]
    pub dataset: PathBuf,

    /// Split strategy
    #[arg(long, value_enum)]
    pub strategy: StrategyArg,

    /// Shuffle seed; the same seed always reproduces the same files
    #[arg(long)]
    pub seed: u64,

    /// Directory receiving train.csv / validation.csv / test.csv
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct EmitFinetuneConfigArgs {
    /// Model id recorded in the manifest
    #[arg(long)]
    pub model: String,

    /// Write the manifest to this file instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs a parsed command line to completion and returns the process exit
/// code. Fatal errors print to stderr and map to 2.
pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Scan(args) => commands::cmd_scan(&args),
        Command::Evaluate(args) => commands::cmd_evaluate(&args),
        Command::Split(args) => commands::cmd_split(&args),
        Command::EmitFinetuneConfig(args) => commands::cmd_emit_finetune_config(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            2
        }
    }
}
