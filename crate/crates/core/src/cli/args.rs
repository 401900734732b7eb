use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::clustering::ClusterConfig;
use crate::construction::{ConstructionConfig, ConstructionMethod};
use crate::dataset::MissingSpec;
use crate::neural::{Activation, Aggregation, Hyperparameters, OptimizerKind};
use crate::pipeline::{ExperimentConfig, Method, TUNING_FOLDS};

const DEFAULT_RATES: &str = "0,0.05,0.1,0.15,0.2,0.25";

#[derive(Debug, Parser)]
#[command(
    name = "ping-gnn",
    version,
    about = "Build interaction graphs from tabular data and evaluate graph-learned embeddings",
    after_help = "Exit status: 0 on success, 1 on a data or I/O error, 2 on a usage error."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a single graph (sgc) or a batch of per-cluster graphs (bgc) from a CSV
    #[command(args_override_self = true)]
    BuildGraph(BuildGraphArgs),
    /// Cross-validate one method and write its metrics
    #[command(args_override_self = true)]
    Run(RunArgs),
    /// Repeat a run over several missing-value rates and write a comparison table
    #[command(args_override_self = true)]
    Sweep(SweepArgs),
    /// Random hyperparameter search; writes the trial log and the best settings
    #[command(args_override_self = true)]
    Tune(TuneArgs),
    /// Re-execute the command recorded in a manifest
    Replay(ReplayArgs),
}

/// Input, seed, and output location shared by every data command.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct IoArgs {
    /// CSV file with a header row
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    /// Name of the target column
    #[arg(long, value_name = "COLUMN")]
    pub target: String,
    /// Root seed; every random stage derives its own stream from it
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory (created if absent)
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct BuildGraphArgs {
    #[command(flatten)]
    pub io: IoArgs,
    /// Construction: sgc (one graph) or bgc (one graph per cluster)
    #[arg(long, default_value_t = ConstructionMethod::Sgc)]
    pub method: ConstructionMethod,
    /// Neighbors kept per sample
    #[arg(long, default_value_t = ConstructionConfig::default().n_neighbors)]
    pub neighbors: usize,
    /// Smallest cluster for bgc
    #[arg(long, default_value_t = ClusterConfig::default().min_cluster_size)]
    pub min_cluster_size: usize,
    /// key = value file supplying defaults for any flag above
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

/// Method, data-corruption, and model settings for experiment commands.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ExperimentArgs {
    /// Method: ssgnn, ssbgnn, or dnn
    #[arg(long, default_value_t = Method::Ssgnn)]
    pub method: Method,
    /// Cross-validation folds
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Fraction of feature cells blanked before imputation
    #[arg(long, default_value_t = 0.0)]
    pub missing_rate: f64,
    /// Training epochs
    #[arg(long, default_value_t = Hyperparameters::default().epochs)]
    pub epochs: usize,
    /// Hidden width, 25 to 600
    #[arg(long, default_value_t = Hyperparameters::default().hidden_dim)]
    pub hidden_dim: usize,
    /// Learning rate, 1e-5 to 1e-1
    #[arg(long, default_value_t = Hyperparameters::default().learning_rate)]
    pub learning_rate: f64,
    /// Dropout rate in [0, 1)
    #[arg(long, default_value_t = Hyperparameters::default().dropout)]
    pub dropout: f64,
    /// Optimizer: adam or sgd
    #[arg(long, default_value_t = Hyperparameters::default().optimizer)]
    pub optimizer: OptimizerKind,
    /// Hidden activation: relu, elu, or leaky_relu
    #[arg(long, default_value_t = Hyperparameters::default().activation)]
    pub activation: Activation,
    /// Neighbor aggregation: pool, mean, or gcn
    #[arg(long, default_value_t = Hyperparameters::default().aggregation)]
    pub aggregation: Aggregation,
    /// Edge-scorer activation: relu, elu, leaky_relu, sigmoid, or tanh
    #[arg(long, default_value_t = Hyperparameters::default().scorer_activation)]
    pub scorer_activation: Activation,
    /// L2 penalty on all parameters
    #[arg(long, default_value_t = Hyperparameters::default().l2_weight)]
    pub l2_weight: f64,
    /// Neighbors kept per sample during graph construction
    #[arg(long, default_value_t = ConstructionConfig::default().n_neighbors)]
    pub neighbors: usize,
    /// Smallest cluster for ssbgnn
    #[arg(long, default_value_t = ClusterConfig::default().min_cluster_size)]
    pub min_cluster_size: usize,
}

impl ExperimentArgs {
    pub fn experiment_config(&self, seed: u64) -> ExperimentConfig {
        let base = ExperimentConfig::new(self.method, seed);
        ExperimentConfig {
            construction: ConstructionConfig {
                n_neighbors: self.neighbors,
                ..base.construction
            },
            cluster: ClusterConfig::new(self.min_cluster_size),
            hp: Hyperparameters {
                hidden_dim: self.hidden_dim,
                learning_rate: self.learning_rate,
                dropout: self.dropout,
                optimizer: self.optimizer,
                activation: self.activation,
                aggregation: self.aggregation,
                scorer_activation: self.scorer_activation,
                l2_weight: self.l2_weight,
                epochs: self.epochs,
                seed,
            },
            missing: MissingSpec {
                rate: self.missing_rate,
                ..base.missing
            },
            k_folds: self.folds,
            ..base
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RunArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// key = value file supplying defaults for any flag above
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Comma-separated missing-value rates, run in the order given
    #[arg(long, value_delimiter = ',', default_value = DEFAULT_RATES)]
    pub rates: Vec<f64>,
    /// key = value file supplying defaults for any flag above
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(after_help = format!(
    "Each trial holds out one fold of a {TUNING_FOLDS}-way split. Sampled settings replace the \
     model flags; --epochs, --l2-weight, and the data flags are kept."
))]
pub struct TuneArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Number of random trials
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// key = value file supplying defaults for any flag above
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct ReplayArgs {
    /// Manifest written by an earlier command
    #[arg(long, value_name = "PATH")]
    pub manifest: PathBuf,
    /// Write outputs here instead of the recorded directory
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}
