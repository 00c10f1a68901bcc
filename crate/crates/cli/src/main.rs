//! `lmsmooth`: count, train, tune, evaluate, analyze and compare n-gram
//! language models.

mod commands;
mod config;
mod data;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lmsmooth::{Execution, LmError};

use config::ParamsConfig;

#[derive(Parser, Debug)]
#[command(name = "lmsmooth", version, about = "n-gram language model smoothing toolkit")]
struct Cli {
    /// Validate inputs and report what would be written, without writing.
    #[arg(long, global = true)]
    dry_run: bool,

    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count n-grams of a corpus and write a count file plus its vocabulary.
    Count(CountArgs),
    /// Train a model and write it as a text model file.
    Train(TrainArgs),
    /// Search a method's parameters on the development sets of a split.
    Tune(TuneArgs),
    /// Score test text with a model file.
    Eval(EvalArgs),
    /// Count-by-count diagnostics of a model against training counts.
    Analyze(AnalyzeArgs),
    /// Tune and score several methods on one shared split.
    Compare(CompareArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct CorpusArgs {
    /// One sentence per line, whitespace-separated tokens.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    order: Option<usize>,
    /// Lowercase all tokens.
    #[arg(long)]
    lowercase: bool,
    /// Keep words seen at least this often in training.
    #[arg(long)]
    min_count: Option<u64>,
    /// Explicit vocabulary file, one word per line.
    #[arg(long)]
    vocab: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ParamArgs {
    #[arg(long)]
    delta: Option<f64>,
    /// Katz cutoff: counts up to k are discounted.
    #[arg(long)]
    k: Option<usize>,
    /// One value, or one per order separated by commas.
    #[arg(long, value_delimiter = ',')]
    beta: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    gamma: Option<Vec<f64>>,
    /// Minimum training n-grams per bucket.
    #[arg(long)]
    c_min: Option<u64>,
    /// Counts above this share one bucket key.
    #[arg(long)]
    c_top: Option<u64>,
    /// Church-Gale minibuckets.
    #[arg(long)]
    c_mb: Option<usize>,
    #[arg(long = "p-n1-0")]
    p_n1_0: Option<f64>,
    #[arg(long = "p-n1-n")]
    p_n1_n: Option<f64>,
    /// Additive smoothing denominator: events or content-words.
    #[arg(long)]
    denominator: Option<String>,
}

impl ParamArgs {
    fn to_config(&self) -> ParamsConfig {
        ParamsConfig {
            delta: self.delta,
            k: self.k,
            beta: self.beta.clone(),
            gamma: self.gamma.clone(),
            c_min: self.c_min,
            c_top: self.c_top,
            c_mb: self.c_mb,
            p_n1_0: self.p_n1_0,
            p_n1_n: self.p_n1_n,
            denominator: self.denominator.clone(),
        }
    }
}

#[derive(Args, Debug)]
pub struct CountArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Count file to write.
    #[arg(long)]
    out: PathBuf,
    /// Vocabulary file to write; defaults to the count file with `.vocab` appended.
    #[arg(long)]
    vocab_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Experiment configuration (TOML). Flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long)]
    method: Option<String>,
    #[command(flatten)]
    params: ParamArgs,
    /// Held-out sentences for interpolation weights when no split is configured.
    #[arg(long)]
    held_out: Option<PathBuf>,
    /// Model file to write; defaults to `model.lm` in the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TuneArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    method: Option<String>,
    #[command(flatten)]
    params: ParamArgs,
    /// Try several starting points where the objective is bumpy.
    #[arg(long)]
    multi_start: bool,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    /// Test sentences, one per line.
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    lowercase: bool,
    /// Vocabulary the test data is expected to use; must match the model's.
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Count each sentence's end marker as a scored word.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    count_eos: bool,
    /// Tab-separated report to write.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[arg(long)]
    model: PathBuf,
    /// Training count file of the model's order.
    #[arg(long)]
    counts: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    lowercase: bool,
    /// First count of the aggregated tail row.
    #[arg(long, default_value_t = lmsmooth::evaluate::TAIL_COUNT)]
    tail: u64,
    /// Largest singleton count shown in the zero-count study.
    #[arg(long, default_value_t = 10)]
    max_n1: u64,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Configurations to compare; corpus and split come from the first.
    #[arg(required = true)]
    configs: Vec<PathBuf>,
    /// Compare these methods with the first configuration's settings instead.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Use the configured parameters as they are.
    #[arg(long)]
    no_tune: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Process exit code for an error.
fn exit_code(e: &LmError) -> u8 {
    match e {
        LmError::Io(_) => 4,
        e if e.is_numeric() => 3,
        _ => 2,
    }
}

fn error_kind(e: &LmError) -> &'static str {
    match e {
        LmError::InvalidParameter(_) => "invalid-parameter",
        LmError::InsufficientData { .. } => "insufficient-data",
        LmError::UndefinedEstimate { .. } => "undefined-estimate",
        LmError::CannotSmooth(_) => "cannot-smooth",
        LmError::UndefinedDistribution { .. } => "undefined-distribution",
        LmError::InfiniteEntropy { .. } => "infinite-entropy",
        LmError::NonFiniteObjective { .. } => "non-finite-objective",
        LmError::VocabularyMismatch { .. } => "vocabulary-mismatch",
        LmError::Format { .. } => "format",
        LmError::Io(_) => "io",
    }
}

fn execution(threads: Option<usize>) -> Result<Execution, LmError> {
    match threads {
        Some(0) => Err(LmError::InvalidParameter("--threads must be at least 1".into())),
        Some(1) => Ok(Execution::Sequential),
        Some(n) => {
            // a second initialization in the same process keeps the first pool
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            Ok(Execution::Parallel)
        }
        None => Ok(Execution::Parallel),
    }
}

fn run(cli: Cli) -> Result<(), LmError> {
    let ctx = commands::Context {
        exec: execution(cli.threads)?,
        dry_run: cli.dry_run,
    };
    match cli.command {
        Command::Count(a) => commands::count(&ctx, a),
        Command::Train(a) => commands::train(&ctx, a),
        Command::Tune(a) => commands::tune(&ctx, a),
        Command::Eval(a) => commands::eval(&ctx, a),
        Command::Analyze(a) => commands::analyze(&ctx, a),
        Command::Compare(a) => commands::compare(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit_code(&e);
            let body = serde_json::json!({
                "error": error_kind(&e),
                "message": e.to_string(),
                "exit_code": code,
            });
            eprintln!("{body}");
            ExitCode::from(code)
        }
    }
}
