use std::fmt::Write as _;

use rand::seq::IndexedRandom;
use rand::Rng;

use super::{build_representation, evaluate_split, ExperimentConfig};
use crate::dataset::{inject_missing, make_folds, PreparedDataset, TabularDataset};
use crate::error::{Error, Result};
use crate::neural::{Activation, Aggregation, Hyperparameters, OptimizerKind, TrainOptions};
use crate::seed::{self, TAG_TUNE};

/// The tuning split holds out one fold of this many.
pub const TUNING_FOLDS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub hp: Hyperparameters,
    /// Held-out MSE; infinite when training diverged.
    pub mse: f64,
    pub best: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneResult {
    pub best: ExperimentConfig,
    pub trials: Vec<TrialRecord>,
}

/// Draws architecture and optimizer settings from the search space, keeping
/// `base`'s epochs, L2 weight, and seed. Learning rate is log-uniform.
pub fn sample_hyperparameters<R: Rng>(rng: &mut R, base: &Hyperparameters) -> Hyperparameters {
    let (hlo, hhi) = Hyperparameters::HIDDEN_DIM_RANGE;
    let (llo, lhi) = Hyperparameters::LEARNING_RATE_RANGE;
    let choose = |rng: &mut R, xs: &[Activation]| *xs.choose(rng).expect("non-empty choice");
    Hyperparameters {
        hidden_dim: rng.random_range(hlo..=hhi),
        learning_rate: 10f64.powf(rng.random_range(llo.log10()..lhi.log10())),
        dropout: rng.random_range(0.0..1.0),
        optimizer: *OptimizerKind::ALL.choose(rng).expect("non-empty choice"),
        activation: choose(rng, &Activation::HIDDEN),
        aggregation: *Aggregation::ALL.choose(rng).expect("non-empty choice"),
        scorer_activation: choose(rng, &Activation::ALL),
        ..*base
    }
}

/// Random search: each trial trains on the complement of fold 0 of a
/// `TUNING_FOLDS`-way split and scores that fold. Graphs are built once and
/// shared across trials. Trials that fail numerically score `+inf`.
pub fn random_search_tune(d: &TabularDataset, base: &ExperimentConfig, trials: usize, seed: u64) -> Result<TuneResult> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    base.validate()?;
    let working = if base.missing.rate > 0.0 {
        inject_missing(d, base.missing)?
    } else {
        d.clone()
    };
    let prepared = PreparedDataset::prepare(&working)?;
    let folds = make_folds(prepared.n_samples(), TUNING_FOLDS, seed::derive(seed, TAG_TUNE, 0))?;
    let (repr, _, _) = build_representation(&prepared, base)?;
    let mut rng = seed::rng(seed::derive(seed, TAG_TUNE, 1));
    let mut records = Vec::with_capacity(trials);
    for trial in 0..trials {
        let hp = sample_hyperparameters(&mut rng, &base.hp);
        let mse = match evaluate_split(&prepared, &repr, &hp, &folds, 0, TrainOptions::default()) {
            Ok((mse, _, _)) if mse.is_finite() => mse,
            Ok(_) | Err(Error::DegenerateDesign) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        records.push(TrialRecord {
            trial,
            hp,
            mse,
            best: false,
        });
    }
    // First minimum wins; if every trial diverged the first trial is kept.
    let best = records
        .iter()
        .enumerate()
        .fold(0, |b, (i, r)| if r.mse < records[b].mse { i } else { b });
    records[best].best = true;
    Ok(TuneResult {
        best: ExperimentConfig {
            hp: records[best].hp,
            ..*base
        },
        trials: records,
    })
}

/// One row per trial with the sampled settings, score, and a best flag.
pub fn trial_log_csv(trials: &[TrialRecord]) -> String {
    let mut out = String::from(
        "trial,hidden_dim,learning_rate,dropout,optimizer,activation,aggregation,scorer_activation,mse,best\n",
    );
    for t in trials {
        let hp = &t.hp;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            t.trial,
            hp.hidden_dim,
            hp.learning_rate,
            hp.dropout,
            hp.optimizer,
            hp.activation,
            hp.aggregation,
            hp.scorer_activation,
            t.mse,
            t.best
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_stay_in_range() {
        let mut rng = seed::rng(1);
        let base = Hyperparameters::default();
        for _ in 0..100 {
            let hp = sample_hyperparameters(&mut rng, &base);
            hp.validate().unwrap();
            assert_eq!(hp.epochs, base.epochs);
        }
    }

    #[test]
    fn learning_rate_is_log_uniform() {
        let mut rng = seed::rng(2);
        let base = Hyperparameters::default();
        let n = 10_000;
        let low = (0..n)
            .filter(|_| sample_hyperparameters(&mut rng, &base).learning_rate <= 1e-3)
            .count() as f64
            / n as f64;
        // [1e-5, 1e-3] is half of the log range
        assert!((low - 0.5).abs() < 0.03, "{low}");
    }
}
