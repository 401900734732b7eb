use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, FoldResults, Method};
use crate::error::Result;

/// Cross-validated outcome of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: Method,
    pub missing_rate: f64,
    /// Feature cells blanked by injection.
    pub corrupted_cells: usize,
    pub per_fold_mse: Vec<f64>,
    pub mean_mse: f64,
    /// Population standard deviation over folds.
    pub std_mse: f64,
    pub construction_seconds: f64,
    /// Training wall-clock summed over folds, construction excluded.
    pub train_seconds: f64,
    pub fold_train_seconds: Vec<f64>,
    pub config: ExperimentConfig,
    pub loss_curves: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

/// Deterministic part of a report, written as the metrics file.
#[derive(Serialize)]
struct Metrics<'a> {
    format: &'static str,
    version: u32,
    method: Method,
    missing_rate: f64,
    corrupted_cells: usize,
    per_fold_mse: &'a [f64],
    mean_mse: f64,
    std_mse: f64,
    warnings: &'a [String],
    config: &'a ExperimentConfig,
}

#[derive(Serialize)]
struct Timings<'a> {
    construction_seconds: f64,
    train_seconds: f64,
    fold_train_seconds: &'a [f64],
}

pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl EvalReport {
    pub(crate) fn assemble(
        config: ExperimentConfig,
        results: FoldResults,
        construction_seconds: f64,
        warnings: Vec<String>,
        corrupted_cells: usize,
    ) -> Self {
        let (mean_mse, std_mse) = mean_std(&results.per_fold_mse);
        Self {
            method: config.method,
            missing_rate: config.missing.rate,
            corrupted_cells,
            per_fold_mse: results.per_fold_mse,
            mean_mse,
            std_mse,
            construction_seconds,
            train_seconds: results.fold_train_seconds.iter().sum(),
            fold_train_seconds: results.fold_train_seconds,
            config,
            loss_curves: results.loss_curves,
            warnings,
        }
    }

    /// Metrics document: everything except wall-clock timings and loss
    /// curves, so reruns with the same configuration are byte-identical.
    pub fn metrics_json(&self) -> Result<String> {
        let m = Metrics {
            format: "ping-metrics",
            version: 1,
            method: self.method,
            missing_rate: self.missing_rate,
            corrupted_cells: self.corrupted_cells,
            per_fold_mse: &self.per_fold_mse,
            mean_mse: self.mean_mse,
            std_mse: self.std_mse,
            warnings: &self.warnings,
            config: &self.config,
        };
        Ok(serde_json::to_string_pretty(&m)? + "\n")
    }

    pub fn timings_json(&self) -> Result<String> {
        let t = Timings {
            construction_seconds: self.construction_seconds,
            train_seconds: self.train_seconds,
            fold_train_seconds: &self.fold_train_seconds,
        };
        Ok(serde_json::to_string_pretty(&t)? + "\n")
    }
}

/// `fold,epoch,loss` rows for every fold's training curve.
pub fn loss_curves_csv(report: &EvalReport) -> String {
    let mut out = String::from("fold,epoch,loss\n");
    for (fold, curve) in report.loss_curves.iter().enumerate() {
        for (epoch, loss) in curve.iter().enumerate() {
            let _ = writeln!(out, "{fold},{epoch},{loss}");
        }
    }
    out
}

/// One row per report: `method,missing_rate,corrupted_cells,mean_mse,std_mse`
/// followed by one `fold_i` column per fold.
pub fn comparison_csv(reports: &[EvalReport]) -> String {
    let k = reports.iter().map(|r| r.per_fold_mse.len()).max().unwrap_or(0);
    let mut out = String::from("method,missing_rate,corrupted_cells,mean_mse,std_mse");
    for i in 0..k {
        let _ = write!(out, ",fold_{i}");
    }
    out.push('\n');
    for r in reports {
        let _ = write!(
            out,
            "{},{},{},{},{}",
            r.method, r.missing_rate, r.corrupted_cells, r.mean_mse, r.std_mse
        );
        for v in &r.per_fold_mse {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}
