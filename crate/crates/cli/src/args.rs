use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mps_core::{DistanceModel, MpsConfig, PValueMode, TraceKind, VarianceMode};

#[derive(Debug, Parser)]
#[command(
    name = "mps",
    version,
    about = "Model provenance set audits and simulations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the exclusion loop over every candidate.
    Run(RunArgs),
    /// Test one suspect against known-unrelated controls.
    Pairwise(PairwiseArgs),
    /// Report only the p-value of the full-set equality test.
    NiScore(RunArgs),
    /// Monte Carlo evaluation on synthetic scenarios.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct TestFlags {
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1000)]
    pub permutations: usize,
    #[arg(long, env = "MPS_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = VarianceArg::PaperLiteral)]
    pub variance_mode: VarianceArg,
    #[arg(long, value_enum, default_value_t = PValueArg::Raw)]
    pub p_value_mode: PValueArg,
}

impl TestFlags {
    pub fn config(&self) -> MpsConfig {
        MpsConfig::default()
            .with_alpha(self.alpha)
            .with_permutations(self.permutations)
            .with_seed(self.seed)
            .with_variance_mode(self.variance_mode.into())
            .with_p_value_mode(self.p_value_mode.into())
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputFlags {
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Worker threads. Results do not depend on this.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Distance matrix, CSV or binary.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// JSONL trace of the target model.
    #[arg(long, requires = "candidate_traces")]
    pub target_trace: Option<PathBuf>,
    /// JSONL traces of the candidates; file stems become model ids.
    #[arg(long, num_args = 1.., requires = "target_trace")]
    pub candidate_traces: Vec<PathBuf>,
    /// Distance for traces; defaults to the kind the traces contain.
    #[arg(long, value_enum)]
    pub distance: Option<DistanceArg>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub test: TestFlags,
    #[command(flatten)]
    pub out: OutputFlags,
}

#[derive(Debug, Clone, Args)]
pub struct PairwiseArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub suspect: String,
    /// Comma-separated or repeated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub controls: Vec<String>,
    #[command(flatten)]
    pub test: TestFlags,
    #[command(flatten)]
    pub out: OutputFlags,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Scenario JSON; its seed is replaced by --seed.
    #[arg(long, conflicts_with_all = ["candidates", "prompts", "tam", "model", "gap"])]
    pub scenario: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub candidates: usize,
    #[arg(long, default_value_t = 1000)]
    pub prompts: usize,
    /// Planted ancestors, at depths 1, 2, 3 in the first columns.
    #[arg(long, default_value_t = 1)]
    pub tam: usize,
    #[arg(long, value_enum, default_value_t = ModelArg::TruncatedGaussian)]
    pub model: ModelArg,
    /// Distance between the unrelated mean and the deepest planted mean.
    #[arg(long)]
    pub gap: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Also write one CSV row per trial.
    #[arg(long)]
    pub per_trial_csv: Option<PathBuf>,
    #[command(flatten)]
    pub test: TestFlags,
    #[command(flatten)]
    pub out: OutputFlags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VarianceArg {
    PaperLiteral,
    MeanScaled,
}

impl From<VarianceArg> for VarianceMode {
    fn from(v: VarianceArg) -> Self {
        match v {
            VarianceArg::PaperLiteral => VarianceMode::PaperLiteral,
            VarianceArg::MeanScaled => VarianceMode::MeanScaled,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PValueArg {
    Raw,
    AddOneSmoothing,
}

impl From<PValueArg> for PValueMode {
    fn from(v: PValueArg) -> Self {
        match v {
            PValueArg::Raw => PValueMode::Raw,
            PValueArg::AddOneSmoothing => PValueMode::AddOneSmoothing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistanceArg {
    Token,
    Semantic,
}

impl From<DistanceArg> for TraceKind {
    fn from(v: DistanceArg) -> Self {
        match v {
            DistanceArg::Token => TraceKind::Token,
            DistanceArg::Semantic => TraceKind::Embedding,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Bernoulli,
    TruncatedGaussian,
}

impl From<ModelArg> for DistanceModel {
    fn from(v: ModelArg) -> Self {
        match v {
            ModelArg::Bernoulli => DistanceModel::Bernoulli,
            ModelArg::TruncatedGaussian => DistanceModel::TruncatedGaussian,
        }
    }
}
