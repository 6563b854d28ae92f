use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use gpal_core::{AgeWeights, Architecture, BudgetRule, ClassifierConfig, FeatureMask, Method};

#[derive(Debug, Parser)]
#[command(name = "gpal", version, about = "Graph active learning with a transferable query policy")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a stochastic block model graph.
    Gen(GenArgs),
    /// Train a query policy on labeled source graphs.
    Train(TrainArgs),
    /// Evaluate a trained policy on a graph.
    Eval(EvalArgs),
    /// Evaluate a heuristic query strategy on a graph.
    Baseline(BaselineArgs),
    /// Budget sweep over several methods, with a chart.
    Sweep(SweepArgs),
    /// Score every ordered query sequence on a tiny graph.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 300)]
    pub nodes: usize,
    #[arg(long, default_value_t = 4)]
    pub classes: usize,
    #[arg(long, default_value_t = 0.1)]
    pub p_in: f64,
    #[arg(long, default_value_t = 0.01)]
    pub p_out: f64,
    #[arg(long, default_value_t = 16)]
    pub feat_dim: usize,
    /// Standard deviation of the feature noise.
    #[arg(long, default_value_t = 1.0)]
    pub noise: f64,
    /// Norm of each class centroid.
    #[arg(long, default_value_t = 1.0)]
    pub separation: f64,
    #[arg(long, default_value_t = 0.15)]
    pub valid_frac: f64,
    #[arg(long, default_value_t = 0.30)]
    pub test_frac: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Graph name; derived from the configuration when omitted.
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifierArgs {
    /// Hidden units of the classifier.
    #[arg(long, default_value_t = 64)]
    pub hidden: usize,
    #[arg(long, default_value_t = 0.03)]
    pub classifier_lr: f64,
    #[arg(long, default_value_t = 5e-4)]
    pub weight_decay: f64,
    /// Early-stopping patience in epochs.
    #[arg(long, default_value_t = 20)]
    pub patience: usize,
    /// Epoch cap when training to convergence.
    #[arg(long, default_value_t = 300)]
    pub max_epochs: usize,
}

impl ClassifierArgs {
    pub fn config(&self) -> ClassifierConfig {
        ClassifierConfig {
            hidden: self.hidden,
            lr: self.classifier_lr,
            weight_decay: self.weight_decay,
            max_convergence_epochs: self.max_epochs,
            patience: self.patience,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Labeled source graph; repeat for several.
    #[arg(long = "graph", required = true)]
    pub graphs: Vec<PathBuf>,
    /// Checkpoint to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Training curve CSV; defaults to the checkpoint path with a `.curve.csv` suffix.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    #[arg(long, default_value_t = 2000)]
    pub episodes: usize,
    #[arg(long, default_value_t = 5)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.9)]
    pub baseline_decay: f64,
    /// Query budget: an absolute count or `<k>xC`.
    #[arg(long, default_value = "5xC")]
    pub budget: BudgetRule,
    /// Degree scale of the state.
    #[arg(long, default_value_t = 20.0)]
    pub alpha: f64,
    /// State features to drop, e.g. `-entropy,-kl`.
    #[arg(long, default_value = "all", allow_hyphen_values = true)]
    pub feature_mask: FeatureMask,
    #[arg(long, default_value = "gcn")]
    pub arch: Architecture,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    #[arg(long, default_value = "5xC")]
    pub budget: BudgetRule,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Results CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the selected node sequences as CSV.
    #[arg(long)]
    pub sequences: Option<PathBuf>,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Reject checkpoints of another architecture.
    #[arg(long)]
    pub arch: Option<Architecture>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AgeArgs {
    /// AGE weights `entropy,centrality,density`.
    #[arg(long, default_value = "0.3333333333333333,0.3333333333333333,0.3333333333333334")]
    pub age_weights: AgeWeights,
    /// Tune AGE weights on these labeled graphs instead (grid search, then mean).
    #[arg(long = "age-source")]
    pub age_sources: Vec<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    pub age_grid_step: f64,
    #[arg(long, default_value_t = 1)]
    pub age_grid_runs: usize,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long)]
    pub method: Method,
    #[command(flatten)]
    pub age: AgeArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Comma-separated budgets.
    #[arg(long, default_value = "10,20,30,50,100")]
    pub budgets: String,
    /// Comma-separated methods; `gpa` needs `--checkpoint`.
    #[arg(long, default_value = "random,uncertainty,centrality,coreset,age")]
    pub methods: String,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Chart of mean micro-F1 against budget with 95% intervals.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[command(flatten)]
    pub age: AgeArgs,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub budget: usize,
    /// Base seed; the classifier seed is that of evaluation run 0.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
}
