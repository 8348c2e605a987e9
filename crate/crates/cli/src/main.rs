//! Command-line front end for the segmentation toolkit: corpus building,
//! statistics, training, threshold tuning, prediction, evaluation, and
//! synthetic-corpus generation, each as a reproducible run that writes a
//! manifest next to its outputs.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

mod commands;
mod manifest;

use std::fmt;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use textseg::corpus::CorpusError;
use textseg::embeddings::{EmbeddingError, OovPolicy};
use textseg::infer::InferError;
use textseg::metrics::{MetricsError, PkVariant};
use textseg::model::ModelError;
use textseg::nn::NnError;
use textseg::train::TrainError;

#[derive(Parser)]
#[command(name = "textseg", version, about = "Supervised text segmentation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse raw documents, filter and label them, and write a seeded
    /// 80/10/10 train/dev/test split.
    BuildCorpus(BuildCorpusArgs),
    /// Print summary statistics for a corpus manifest.
    Stats(StatsArgs),
    /// Train a model from scratch and write checkpoints plus history.
    Train(TrainArgs),
    /// Sweep the decoding threshold on a dev set.
    Tune(TuneArgs),
    /// Run a trained model over a corpus and write predicted segmentations.
    Predict(PredictArgs),
    /// Score a segmenter against reference segmentations with Pk.
    Evaluate(EvaluateArgs),
    /// Generate a synthetic concatenation-style corpus.
    GenSynth(GenSynthArgs),
}

#[derive(Args)]
pub struct BuildCorpusArgs {
    /// Directory of raw documents in the segment-separator format.
    #[arg(long = "in", value_name = "DIR")]
    pub in_dir: PathBuf,
    /// Output directory for records, split manifests, and reports.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Seed for the split shuffle.
    #[arg(long, default_value_t = 13)]
    pub seed: u64,
}

#[derive(Args)]
pub struct StatsArgs {
    /// Corpus manifest (one record path per line).
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,
    /// Optional directory for stats.json and the run manifest.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Training-split manifest.
    #[arg(long, value_name = "FILE")]
    pub train: PathBuf,
    /// Dev-split manifest; enables dev-loss tracking and best checkpoints.
    #[arg(long, value_name = "FILE")]
    pub dev: Option<PathBuf>,
    /// Word-vector file in the word2vec text format.
    #[arg(long, value_name = "FILE")]
    pub embeddings: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Sentence-encoder hidden size per direction.
    #[arg(long, default_value_t = 128)]
    pub h1: usize,
    /// Sentence-level predictor hidden size per direction.
    #[arg(long, default_value_t = 128)]
    pub h2: usize,
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    /// Global-norm gradient clip; omitted means no clipping.
    #[arg(long)]
    pub clip: Option<f64>,
    /// Seed for parameter initialization and epoch shuffling.
    #[arg(long, default_value_t = 13)]
    pub seed: u64,
    /// Maximum tokens fed to the sentence encoder per sentence.
    #[arg(long, default_value_t = textseg::model::DEFAULT_TOKEN_CAP)]
    pub token_cap: usize,
    /// Out-of-vocabulary policy: zeros | mean.
    #[arg(long, default_value = "zeros")]
    pub oov: OovPolicy,
    /// Keep document order fixed instead of reshuffling each epoch.
    #[arg(long)]
    pub no_shuffle: bool,
    /// Stop after three epochs without dev-loss improvement.
    #[arg(long)]
    pub early_stopping: bool,
}

#[derive(Args)]
pub struct TuneArgs {
    #[arg(long, value_name = "FILE")]
    pub checkpoint: PathBuf,
    /// Dev-split manifest the threshold is tuned on.
    #[arg(long, value_name = "FILE")]
    pub dev: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub embeddings: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[arg(long, default_value = "zeros")]
    pub oov: OovPolicy,
}

#[derive(Args)]
pub struct PredictArgs {
    #[arg(long, value_name = "FILE")]
    pub checkpoint: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub embeddings: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Decoding threshold; overrides --tau-file.
    #[arg(long)]
    pub tau: Option<f64>,
    /// tuned.json produced by the tune command.
    #[arg(long, value_name = "FILE")]
    pub tau_file: Option<PathBuf>,
    /// Worker threads for document-level parallelism.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, default_value = "zeros")]
    pub oov: OovPolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SegmenterKind {
    /// Greedy decoding of a trained checkpoint.
    Model,
    /// Seeded boundary-per-sentence coin flips at rate 1/k.
    Random,
    /// Hypotheses read from a predictions file.
    File,
}

#[derive(Args)]
pub struct EvaluateArgs {
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,
    /// Pk window variant: sentences | words.
    #[arg(long, default_value = "sentences")]
    pub variant: PkVariant,
    #[arg(long, value_enum, default_value_t = SegmenterKind::Model)]
    pub segmenter: SegmenterKind,
    /// Required for --segmenter model.
    #[arg(long, value_name = "FILE")]
    pub checkpoint: Option<PathBuf>,
    /// Required for --segmenter model.
    #[arg(long, value_name = "FILE")]
    pub embeddings: Option<PathBuf>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, value_name = "FILE")]
    pub tau_file: Option<PathBuf>,
    /// Predictions file for --segmenter file.
    #[arg(long, value_name = "FILE")]
    pub hypotheses: Option<PathBuf>,
    /// Seed for the random segmenter.
    #[arg(long, default_value_t = 13)]
    pub seed: u64,
    /// Optional directory for eval_report.json and the run manifest.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, default_value = "zeros")]
    pub oov: OovPolicy,
}

#[derive(Args)]
pub struct GenSynthArgs {
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub docs: usize,
    #[arg(long, default_value_t = 10)]
    pub segs_per_doc: usize,
    /// Passage length range in sentences, inclusive.
    #[arg(long, default_value_t = 3)]
    pub seg_len_lo: usize,
    #[arg(long, default_value_t = 11)]
    pub seg_len_hi: usize,
    /// Number of passage sources; each owns a disjoint vocabulary.
    #[arg(long, default_value_t = 20)]
    pub sources: usize,
    #[arg(long, default_value_t = 40)]
    pub sentences_per_source: usize,
    #[arg(long, default_value_t = 12)]
    pub vocab_per_source: usize,
    /// Words-per-sentence range in the pool, inclusive.
    #[arg(long, default_value_t = 4)]
    pub words_lo: usize,
    #[arg(long, default_value_t = 9)]
    pub words_hi: usize,
    /// Seed for document assembly.
    #[arg(long, default_value_t = 13)]
    pub seed: u64,
    /// Seed for the passage pool itself; runs sharing it share sources.
    #[arg(long, default_value_t = 7)]
    pub pool_seed: u64,
    /// Also write a one-hot embedding table covering the pool vocabulary.
    #[arg(long)]
    pub emit_embeddings: bool,
    #[arg(long, default_value_t = 8)]
    pub embed_dim: usize,
}

/// Command failures bucketed by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad invocation: missing or contradictory flags, out-of-range values.
    Usage(String),
    /// Missing, malformed, or mismatched inputs.
    Data(String),
    /// Non-finite numbers during training or inference.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<EmbeddingError> for CliError {
    fn from(e: EmbeddingError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Nn(
                n @ (NnError::NonFiniteValue { .. }
                | NnError::NonFiniteActivation { .. }
                | NnError::NonFiniteGradient),
            ) => CliError::Numeric(n.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::NonFiniteLoss { .. } => CliError::Numeric(e.to_string()),
            TrainError::Model(m) => m.into(),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<InferError> for CliError {
    fn from(e: InferError) -> Self {
        match e {
            InferError::Model(m) => m.into(),
            other => CliError::Data(other.to_string()),
        }
    }
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let result = match cli.command {
        Cmd::BuildCorpus(args) => commands::build_corpus(&args, &argv),
        Cmd::Stats(args) => commands::stats(&args, &argv),
        Cmd::Train(args) => commands::train(&args, &argv),
        Cmd::Tune(args) => commands::tune(&args, &argv),
        Cmd::Predict(args) => commands::predict(&args, &argv),
        Cmd::Evaluate(args) => commands::evaluate(&args, &argv),
        Cmd::GenSynth(args) => commands::gen_synth(&args, &argv),
    };
    match result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
