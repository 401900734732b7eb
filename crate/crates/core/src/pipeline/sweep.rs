use super::{run_experiment, EvalReport, ExperimentConfig};
use crate::dataset::{MissingSpec, TabularDataset};
use crate::error::Result;
use crate::seed::{self, TAG_MISSING};

/// Runs the experiment once per rate, in the given order. Each rate gets its
/// own corruption stream; fold assignment is shared because it depends only
/// on `cfg.seed` and the sample count.
pub fn missing_sweep(d: &TabularDataset, cfg: &ExperimentConfig, rates: &[f64]) -> Result<Vec<EvalReport>> {
    rates
        .iter()
        .enumerate()
        .map(|(i, &rate)| {
            // A zero rate corrupts nothing, so it keeps the clean-run config.
            let seed = if rate == 0.0 {
                cfg.missing.seed
            } else {
                seed::derive(cfg.seed, TAG_MISSING, i as u64 + 1)
            };
            let run_cfg = ExperimentConfig {
                missing: MissingSpec { rate, seed },
                ..*cfg
            };
            run_experiment(d, &run_cfg)
        })
        .collect()
}
