//! Experiment orchestration: preprocessing, construction, per-fold training,
//! embedding assessment by ridge regression, missing-data sweeps, and random
//! hyperparameter search.

mod report;
mod ridge;
mod sweep;
mod tune;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::clustering::{cluster, ClusterConfig};
use crate::construction::{build_batched_graphs, build_single_graph, ConstructionConfig, ConstructionMethod};
use crate::dataset::{inject_missing, make_folds, FoldPlan, MissingSpec, PreparedDataset, TabularDataset};
use crate::error::{Error, Result};
use crate::gnn::{extract_batch_embeddings, extract_embeddings, train_batched, train_transductive, GnnModel};
use crate::graph::{GraphBatch, PingGraph};
use crate::neural::{train_mlp, Hyperparameters, TrainOptions};
use crate::seed::{self, TAG_FOLDS, TAG_FOLD_MODEL};

pub use report::{comparison_csv, loss_curves_csv, EvalReport};
pub use ridge::{embed_and_regress, fit_ridge, RidgeFit, RIDGE_SCALE};
pub use sweep::missing_sweep;
pub use tune::{random_search_tune, sample_hyperparameters, trial_log_csv, TrialRecord, TuneResult, TUNING_FOLDS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Graph model on one graph over all samples.
    Ssgnn,
    /// Graph model on a batch of per-cluster graphs.
    Ssbgnn,
    /// Perceptron baseline on raw features.
    Dnn,
}

impl Method {
    pub const ALL: [Method; 3] = [Self::Ssgnn, Self::Ssbgnn, Self::Dnn];

    pub fn name(self) -> &'static str {
        match self {
            Self::Ssgnn => "ssgnn",
            Self::Ssbgnn => "ssbgnn",
            Self::Dnn => "dnn",
        }
    }

    fn construction_method(self) -> Option<ConstructionMethod> {
        match self {
            Self::Ssgnn => Some(ConstructionMethod::Sgc),
            Self::Ssbgnn => Some(ConstructionMethod::Bgc),
            Self::Dnn => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method `{s}` (expected ssgnn, ssbgnn, dnn)"))
    }
}

/// Everything needed to reproduce one cross-validated run. `seed` drives
/// fold assignment; `hp.seed` drives model initialization and dropout;
/// `missing.seed` drives corruption.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub method: Method,
    pub construction: ConstructionConfig,
    pub cluster: ClusterConfig,
    pub hp: Hyperparameters,
    pub missing: MissingSpec,
    pub k_folds: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Defaults for `method` with every stage seeded from `seed`.
    pub fn new(method: Method, seed: u64) -> Self {
        let construction = ConstructionConfig {
            method: method.construction_method().unwrap_or(ConstructionMethod::Sgc),
            ..ConstructionConfig::default()
        };
        Self {
            method,
            construction,
            cluster: ClusterConfig::default(),
            hp: Hyperparameters {
                seed,
                ..Hyperparameters::default()
            },
            missing: MissingSpec {
                rate: 0.0,
                seed: seed::derive(seed, seed::TAG_MISSING, 0),
            },
            k_folds: 5,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.hp.validate()?;
        if self.k_folds < 2 {
            return Err(Error::InvalidConfig(format!(
                "k_folds must be at least 2, got {}",
                self.k_folds
            )));
        }
        if !(0.0..1.0).contains(&self.missing.rate) {
            return Err(Error::InvalidRate(self.missing.rate));
        }
        if self.construction.n_neighbors == 0 {
            return Err(Error::InvalidConfig("n_neighbors must be at least 1".into()));
        }
        if let Some(m) = self.method.construction_method() {
            if m != self.construction.method {
                return Err(Error::InvalidConfig(format!(
                    "method {} requires {:?} construction",
                    self.method, m
                )));
            }
        }
        if self.method == Method::Ssbgnn {
            self.cluster.validate()?;
        }
        Ok(())
    }

    pub fn fold_plan(&self, samples: usize) -> Result<FoldPlan> {
        make_folds(samples, self.k_folds, seed::derive(self.seed, TAG_FOLDS, 0))
    }
}

/// Input the models train on.
#[derive(Debug, Clone)]
pub enum Representation {
    Features,
    Graph(PingGraph),
    Batch(GraphBatch),
}

/// Which sample ids touched each stage of one fold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldTrace {
    pub fold: usize,
    /// Samples whose targets entered a training-loss term.
    pub loss_ids: Vec<usize>,
    /// Samples used to fit the ridge regressor.
    pub regression_ids: Vec<usize>,
    pub test_ids: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct FoldResults {
    pub per_fold_mse: Vec<f64>,
    pub loss_curves: Vec<Vec<f64>>,
    pub fold_train_seconds: Vec<f64>,
    pub traces: Vec<FoldTrace>,
}

/// Builds the graph(s) `cfg.method` needs. Returns the representation,
/// warnings, and elapsed seconds.
pub fn build_representation(
    prepared: &PreparedDataset,
    cfg: &ExperimentConfig,
) -> Result<(Representation, Vec<String>, f64)> {
    let start = Instant::now();
    let (repr, warnings) = match cfg.method {
        Method::Dnn => (Representation::Features, Vec::new()),
        Method::Ssgnn => (
            Representation::Graph(build_single_graph(prepared, &cfg.construction)?),
            Vec::new(),
        ),
        Method::Ssbgnn => {
            let clusters = cluster(prepared.features(), &cfg.cluster)?;
            let (batch, warnings) = build_batched_graphs(prepared, &cfg.construction, &clusters)?;
            (
                Representation::Batch(batch),
                warnings.iter().map(ToString::to_string).collect(),
            )
        }
    };
    Ok((repr, warnings, start.elapsed().as_secs_f64()))
}

/// Trains on the complement of `test_idx` and returns embeddings for every
/// sample plus the training trace.
fn train_and_embed(
    prepared: &PreparedDataset,
    repr: &Representation,
    hp: &Hyperparameters,
    train_mask: &[bool],
    model_seed: u64,
    opts: TrainOptions,
) -> Result<(Array2<f64>, Vec<f64>, Vec<usize>)> {
    let f = prepared.n_features();
    match repr {
        Representation::Features => {
            let ids: Vec<usize> = (0..prepared.n_samples()).collect();
            let out = train_mlp(prepared.features(), prepared.target(), train_mask, &ids, hp, model_seed)?;
            let emb = out.model.embeddings(prepared.features())?;
            Ok((emb, out.loss_history, out.loss_ids))
        }
        Representation::Graph(g) => {
            let local: Vec<bool> = g.node_global_ids().iter().map(|&id| train_mask[id]).collect();
            let out = train_transductive(GnnModel::new(f, hp, model_seed), g, &local, hp, model_seed, opts)?;
            let emb = extract_embeddings(&out.model, g)?;
            let mut ids = out.loss_ids;
            ids.sort_unstable();
            Ok((emb, out.loss_history, ids))
        }
        Representation::Batch(b) => {
            let out = train_batched(GnnModel::new(f, hp, model_seed), b, train_mask, hp, model_seed, opts)?;
            let emb = extract_batch_embeddings(&out.model, b)?;
            Ok((emb, out.loss_history, out.loss_ids))
        }
    }
}

/// Model seed for fold `fold`.
pub fn fold_model_seed(hp_seed: u64, fold: usize) -> u64 {
    seed::derive(hp_seed, TAG_FOLD_MODEL, fold as u64)
}

/// Test MSE of one train/test split.
pub fn evaluate_split(
    prepared: &PreparedDataset,
    repr: &Representation,
    hp: &Hyperparameters,
    folds: &FoldPlan,
    fold: usize,
    opts: TrainOptions,
) -> Result<(f64, Vec<f64>, FoldTrace)> {
    let train_mask = folds.train_mask(fold);
    let (emb, curve, loss_ids) =
        train_and_embed(prepared, repr, hp, &train_mask, fold_model_seed(hp.seed, fold), opts)?;
    let train_idx = folds.train_indices(fold);
    let test_idx = folds.test_indices(fold);
    let mse = embed_and_regress(emb.view(), prepared.target().view(), &train_idx, &test_idx)?;
    Ok((
        mse,
        curve,
        FoldTrace {
            fold,
            loss_ids,
            regression_ids: train_idx,
            test_ids: test_idx,
        },
    ))
}

/// Runs every fold of `folds` in order.
pub fn evaluate_folds(
    prepared: &PreparedDataset,
    repr: &Representation,
    hp: &Hyperparameters,
    folds: &FoldPlan,
    opts: TrainOptions,
) -> Result<FoldResults> {
    if folds.n_samples() != prepared.n_samples() {
        return Err(Error::LengthMismatch {
            left: folds.n_samples(),
            right: prepared.n_samples(),
        });
    }
    let mut out = FoldResults {
        per_fold_mse: Vec::new(),
        loss_curves: Vec::new(),
        fold_train_seconds: Vec::new(),
        traces: Vec::new(),
    };
    for fold in 0..folds.k() {
        let start = Instant::now();
        let (mse, curve, trace) = evaluate_split(prepared, repr, hp, folds, fold, opts)?;
        out.fold_train_seconds.push(start.elapsed().as_secs_f64());
        out.per_fold_mse.push(mse);
        out.loss_curves.push(curve);
        out.traces.push(trace);
    }
    Ok(out)
}

/// Perceptron baseline over `folds`: train on each fold's complement, embed,
/// and score the test fold by ridge regression on the embeddings.
pub fn dnn_baseline_train(d: &PreparedDataset, hp: &Hyperparameters, folds: &FoldPlan) -> Result<EvalReport> {
    hp.validate()?;
    let mut cfg = ExperimentConfig::new(Method::Dnn, hp.seed);
    cfg.hp = *hp;
    cfg.k_folds = folds.k();
    let results = evaluate_folds(d, &Representation::Features, hp, folds, TrainOptions::default())?;
    Ok(EvalReport::assemble(cfg, results, 0.0, Vec::new(), 0))
}

/// Full pipeline on a raw dataset: corrupt (if configured), impute,
/// standardize, construct, then cross-validate.
pub fn run_experiment(d: &TabularDataset, cfg: &ExperimentConfig) -> Result<EvalReport> {
    Ok(run_experiment_traced(d, cfg)?.0)
}

/// [`run_experiment`] that also returns which samples each fold used where.
pub fn run_experiment_traced(d: &TabularDataset, cfg: &ExperimentConfig) -> Result<(EvalReport, Vec<FoldTrace>)> {
    cfg.validate()?;
    let (working, corrupted) = if cfg.missing.rate > 0.0 {
        let before = d.missing_count();
        let c = inject_missing(d, cfg.missing)?;
        let added = c.missing_count() - before;
        (c, added)
    } else {
        (d.clone(), 0)
    };
    let prepared = PreparedDataset::prepare(&working)?;
    let folds = cfg.fold_plan(prepared.n_samples())?;
    let (repr, warnings, construction_seconds) = build_representation(&prepared, cfg)?;
    let results = evaluate_folds(&prepared, &repr, &cfg.hp, &folds, TrainOptions::default())?;
    let traces = results.traces.clone();
    Ok((
        EvalReport::assemble(*cfg, results, construction_seconds, warnings, corrupted),
        traces,
    ))
}

#[cfg(test)]
mod tests;
