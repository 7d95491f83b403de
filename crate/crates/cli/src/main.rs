//! `conflens`: ingest review archives, train n-gram models and run the
//! conformance experiments.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use conflens::analysis::{AnalysisError, Experiment, TrainPolicy, MAX_ORDER};
use conflens::ingest::{IngestError, SelectionMode};
use conflens::lexing::FileKind;
use conflens::lm::LmError;

/// Exit status for bad command-line usage (sysexits EX_USAGE).
const EXIT_USAGE: u8 = 64;
const EXIT_IO: u8 = 1;
const EXIT_PRECONDITION: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "conflens", version, about = "Code-review conformance analysis with n-gram language models")]
struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a review archive (or fetch one from Gerrit) and write it out.
    Ingest(IngestArgs),
    /// Train and serialize an n-gram model on accepted post-review code.
    Train(TrainArgs),
    /// Run one experiment and write CSV/JSON reports.
    Experiment(ExperimentArgs),
}

#[derive(Args, Debug)]
struct IngestArgs {
    /// JSONL review archive to validate.
    #[arg(long, conflicts_with = "gerrit", required_unless_present = "gerrit")]
    input: Option<PathBuf>,
    /// Gerrit base URL to fetch from instead of reading a file.
    #[arg(long, requires = "query")]
    gerrit: Option<String>,
    /// Gerrit change query, e.g. `project:openstack/nova status:closed`.
    #[arg(long)]
    query: Option<String>,
    #[arg(long)]
    max_changes: Option<usize>,
    /// Validated archive to write.
    #[arg(long, short)]
    output: PathBuf,
    /// Abort on the first malformed record instead of skipping it.
    #[arg(long)]
    fail_fast: bool,
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// `mkn`, `mle` or `additive=<delta>`.
    #[arg(long, default_value = "mkn", value_parser = parse_smoothing)]
    smoothing: conflens::Smoothing,
    /// Training tokens seen fewer times are mapped to `<unk>`.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    min_count: u32,
    /// Pre/post versions: first vs last revision, or both sides of the final diff.
    #[arg(long, value_enum, default_value_t = ModeArg::FirstVsLast)]
    mode: ModeArg,
    /// Restrict to these extensions (comma separated, e.g. `.py,.sh`).
    #[arg(long, value_delimiter = ',', value_parser = parse_ext)]
    ext: Vec<String>,
    /// Restrict to these file kinds (programming, configuration, documentation).
    #[arg(long, value_delimiter = ',', value_parser = parse_kind)]
    kind: Vec<FileKind>,
    /// Directory with `<language>.tokens` files replacing the builtin tables.
    #[arg(long)]
    token_sets: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// JSONL review archive.
    #[arg(long)]
    archive: PathBuf,
    /// N-gram order (1 to 9).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=MAX_ORDER as i64))]
    order: u8,
    #[command(flatten)]
    model: ModelArgs,
    /// Model file to write.
    #[arg(long, short)]
    output: PathBuf,
    /// Skip the model cache.
    #[arg(long)]
    no_cache: bool,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(value_enum)]
    experiment: ExperimentArg,
    /// JSONL review archive.
    #[arg(long)]
    archive: PathBuf,
    /// N-gram orders, `A..B` or a single order.
    #[arg(long, default_value = "3..9", value_parser = parse_orders)]
    order: (usize, usize),
    #[command(flatten)]
    model: ModelArgs,
    /// Training set per scored review: all other accepted reviews, or only earlier ones.
    #[arg(long, value_enum, default_value_t = PolicyArg::Loo)]
    train_policy: PolicyArg,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Report formats to write.
    #[arg(long, value_enum, default_value_t = Format::Both)]
    format: Format,
    /// Recorded in the manifest; no experiment samples randomly.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Ranked tokens per list in table4.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    k: u32,
    /// Directory for reports and the run manifest.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ExperimentArg {
    Pq1,
    Pq2,
    Rq1,
    Rq2,
    Table1,
    Table3,
    Table4,
}

impl From<ExperimentArg> for Experiment {
    fn from(e: ExperimentArg) -> Self {
        match e {
            ExperimentArg::Pq1 => Experiment::Pq1,
            ExperimentArg::Pq2 => Experiment::Pq2,
            ExperimentArg::Rq1 => Experiment::Rq1,
            ExperimentArg::Rq2 => Experiment::Rq2,
            ExperimentArg::Table1 => Experiment::Table1,
            ExperimentArg::Table3 => Experiment::Table3,
            ExperimentArg::Table4 => Experiment::Table4,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    #[value(name = "first_vs_last")]
    FirstVsLast,
    #[value(name = "diff_sides")]
    DiffSides,
}

impl From<ModeArg> for SelectionMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::FirstVsLast => SelectionMode::FirstVsLast,
            ModeArg::DiffSides => SelectionMode::DiffSidesOfFinal,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum PolicyArg {
    Loo,
    Chrono,
}

impl From<PolicyArg> for TrainPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Loo => TrainPolicy::Loo,
            PolicyArg::Chrono => TrainPolicy::Chrono,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
    Both,
}

fn parse_smoothing(s: &str) -> Result<conflens::Smoothing, String> {
    s.parse().map_err(|e: LmError| e.to_string())
}

fn parse_ext(s: &str) -> Result<String, String> {
    let s = s.trim().to_lowercase();
    if s.is_empty() || s == "." {
        return Err("empty extension".into());
    }
    Ok(if s.starts_with('.') { s } else { format!(".{s}") })
}

fn parse_kind(s: &str) -> Result<FileKind, String> {
    s.parse()
}

fn parse_orders(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
        None => (s, s),
    };
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|_| format!("invalid order {v:?}"));
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if lo < 1 || hi > MAX_ORDER || lo > hi {
        return Err(format!("orders must satisfy 1 <= A <= B <= {MAX_ORDER}"));
    }
    Ok((lo, hi))
}

/// Maps an error chain to the documented exit statuses.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<commands::UsageError>().is_some() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<AnalysisError>() {
            return match e {
                AnalysisError::InvalidConfig(_) => EXIT_USAGE,
                AnalysisError::Ingest(IngestError::Io(_)) => EXIT_IO,
                _ => EXIT_PRECONDITION,
            };
        }
        if let Some(e) = cause.downcast_ref::<IngestError>() {
            return match e {
                IngestError::Io(_) | IngestError::Fetch { .. } | IngestError::PaginationLoop { .. } => EXIT_IO,
                IngestError::Record(_) | IngestError::NoRevisions(_) => EXIT_PRECONDITION,
            };
        }
        if let Some(e) = cause.downcast_ref::<LmError>() {
            return match e {
                LmError::Io(_) => EXIT_IO,
                _ => EXIT_PRECONDITION,
            };
        }
        if cause.downcast_ref::<commands::PreconditionError>().is_some() {
            return EXIT_PRECONDITION;
        }
    }
    EXIT_IO
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match cli.command {
        Command::Ingest(args) => commands::ingest(args),
        Command::Train(args) => commands::train(args),
        Command::Experiment(args) => commands::experiment(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
