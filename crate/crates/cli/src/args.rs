use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "semgrad",
    version,
    about = "Train word embeddings and run generalization-gradient experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train skip-gram embeddings on a text corpus.
    TrainEmbeddings(TrainEmbeddingsArgs),
    /// Train the classifier on a spec and write the per-epoch gradient CSV.
    RunExperiment(RunExperimentArgs),
    /// Run one spec against two embedding stores.
    Contrast(ContrastArgs),
    /// Print the nearest neighbours of words in an embedding store.
    Neighbors(NeighborsArgs),
    /// Check a spec file, optionally against an embedding store.
    ValidateSpec(ValidateSpecArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Binary,
}

#[derive(Debug, Args)]
pub struct SeedArg {
    /// RNG seed.
    #[arg(long, env = "SEMGRAD_SEED")]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TrainEmbeddingsArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Embedding file to write; a `.bin` extension selects the binary format.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub format: Option<OutputFormat>,
    #[arg(long, default_value_t = 300)]
    pub dim: usize,
    #[arg(long, default_value_t = 5)]
    pub window_before: usize,
    #[arg(long, default_value_t = 5)]
    pub window_after: usize,
    #[arg(long, default_value_t = 5)]
    pub min_count: u64,
    /// Subsampling threshold; 0 disables subsampling.
    #[arg(long, default_value_t = 0.0)]
    pub subsample_t: f64,
    /// whitespace, per-character or pre-segmented.
    #[arg(long, default_value = "whitespace")]
    pub tokenizer: String,
    /// Fold case; off by default for per-character tokenization only.
    #[arg(long)]
    pub lowercase: Option<bool>,
    /// Skip-gram learning rate.
    #[arg(long, default_value_t = 0.025)]
    pub eta: f64,
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
pub struct HyperArgs {
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Expected embedding dimension.
    #[arg(long)]
    pub dim: Option<usize>,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Fail on nouns missing from the embeddings (default).
    #[arg(long, conflicts_with = "lenient")]
    pub strict: bool,
    /// Drop pairs whose nouns are missing from the embeddings.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Args)]
pub struct RunExperimentArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Embedding file; defaults to the spec's `embeddings` entry.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Gradient CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub hyper: HyperArgs,
}

#[derive(Debug, Args)]
pub struct ContrastArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Store read with the spec's first noun column.
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Store read with the spec's second noun column.
    #[arg(long)]
    pub embeddings_b: PathBuf,
    /// Output CSV stem; writes `<stem>_a.csv` and `<stem>_b.csv`.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub hyper: HyperArgs,
}

#[derive(Debug, Args)]
pub struct NeighborsArgs {
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long = "word", required = true)]
    pub words: Vec<String>,
    #[arg(short, long, default_value_t = 10)]
    pub k: usize,
    /// Also write the neighbours as TSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateSpecArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Also resolve every noun against this store.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, conflicts_with = "lenient")]
    pub strict: bool,
    #[arg(long)]
    pub lenient: bool,
}
