use std::io::Write;
use std::path::Path;

use super::args::{BuildGraphArgs, IoArgs, RunArgs, SweepArgs, TuneArgs};
use super::config::render_config;
use super::manifest::write_atomic;
use crate::clustering::{cluster, ClusterConfig};
use crate::construction::{build_batched_graphs, build_single_graph, ConstructionConfig, ConstructionMethod};
use crate::dataset::{load_csv, PreparedDataset, TabularDataset};
use crate::error::{Error, Result};
use crate::neural::Hyperparameters;
use crate::pipeline::{
    comparison_csv, loss_curves_csv, missing_sweep, random_search_tune, run_experiment, trial_log_csv, EvalReport,
};

/// Collects output files and user-facing lines for one command.
pub struct Outputs<'a> {
    dir: &'a Path,
    pub written: Vec<String>,
    pub stdout: &'a mut dyn Write,
}

impl<'a> Outputs<'a> {
    pub fn new(dir: &'a Path, stdout: &'a mut dyn Write) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Self {
            dir,
            written: Vec::new(),
            stdout,
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        write_atomic(&self.dir.join(name), contents)?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn say(&mut self, line: impl std::fmt::Display) {
        // A closed stdout should not fail a run whose files are written.
        let _ = writeln!(self.stdout, "{line}");
    }
}

fn load(io: &IoArgs, out: &mut Outputs<'_>) -> Result<TabularDataset> {
    let (d, report) = load_csv(&io.input, &io.target)?;
    out.say(format!("{}: {report}", io.input.display()));
    Ok(d)
}

pub fn build_graph(args: &BuildGraphArgs, out: &mut Outputs<'_>) -> Result<()> {
    let d = load(&args.io, out)?;
    let prepared = PreparedDataset::prepare(&d)?;
    let cfg = ConstructionConfig {
        n_neighbors: args.neighbors,
        method: args.method,
    };
    match args.method {
        ConstructionMethod::Sgc => {
            let g = build_single_graph(&prepared, &cfg)?;
            out.write("graph.json", &g.to_json())?;
            out.say(format!("nodes: {}, edges: {}", g.n_nodes(), g.n_edges()));
        }
        ConstructionMethod::Bgc => {
            let cluster_cfg = ClusterConfig::new(args.min_cluster_size);
            cluster_cfg.validate()?;
            let clusters = cluster(prepared.features(), &cluster_cfg)?;
            let (batch, warnings) = build_batched_graphs(&prepared, &cfg, &clusters)?;
            for w in &warnings {
                out.say(format!("warning: {w}"));
            }
            out.write("batch.json", &batch.to_json())?;
            out.say(format!(
                "nodes: {}, edges: {}, clusters: {}",
                batch.n_samples(),
                batch.n_edges(),
                batch.graphs().len()
            ));
        }
    }
    Ok(())
}

fn report_summary(r: &EvalReport, out: &mut Outputs<'_>) {
    for w in &r.warnings {
        out.say(format!("warning: {w}"));
    }
    out.say(format!(
        "{} (missing rate {}): MSE {:.6} ± {:.6} over {} folds; construction {:.3}s, training {:.3}s",
        r.method,
        r.missing_rate,
        r.mean_mse,
        r.std_mse,
        r.per_fold_mse.len(),
        r.construction_seconds,
        r.train_seconds
    ));
}

pub fn run(args: &RunArgs, out: &mut Outputs<'_>) -> Result<()> {
    let d = load(&args.io, out)?;
    let cfg = args.experiment.experiment_config(args.io.seed);
    let report = run_experiment(&d, &cfg)?;
    out.write("metrics.json", &report.metrics_json()?)?;
    out.write("timings.json", &report.timings_json()?)?;
    out.write("loss_curves.csv", &loss_curves_csv(&report))?;
    report_summary(&report, out);
    Ok(())
}

pub fn sweep(args: &SweepArgs, out: &mut Outputs<'_>) -> Result<()> {
    let d = load(&args.io, out)?;
    if args.rates.is_empty() {
        return Err(Error::InvalidConfig("--rates: at least one rate is required".into()));
    }
    if let Some(&r) = args.rates.iter().find(|r| !(0.0..1.0).contains(*r)) {
        return Err(Error::InvalidConfig(format!("--rates: {r} is outside [0, 1)")));
    }
    let cfg = args.experiment.experiment_config(args.io.seed);
    let reports = missing_sweep(&d, &cfg, &args.rates)?;
    for (i, r) in reports.iter().enumerate() {
        out.write(&format!("metrics_{i}.json"), &r.metrics_json()?)?;
        out.write(&format!("timings_{i}.json"), &r.timings_json()?)?;
        report_summary(r, out);
    }
    out.write("comparison.csv", &comparison_csv(&reports))?;
    Ok(())
}

/// Model settings in `--config` form, so the result can seed a `run`.
fn hyperparameter_config(hp: &Hyperparameters) -> String {
    render_config(&[
        ("hidden-dim", hp.hidden_dim.to_string()),
        ("learning-rate", hp.learning_rate.to_string()),
        ("dropout", hp.dropout.to_string()),
        ("optimizer", hp.optimizer.to_string()),
        ("activation", hp.activation.to_string()),
        ("aggregation", hp.aggregation.to_string()),
        ("scorer-activation", hp.scorer_activation.to_string()),
        ("l2-weight", hp.l2_weight.to_string()),
        ("epochs", hp.epochs.to_string()),
    ])
}

pub fn tune(args: &TuneArgs, out: &mut Outputs<'_>) -> Result<()> {
    let d = load(&args.io, out)?;
    let base = args.experiment.experiment_config(args.io.seed);
    let result = random_search_tune(&d, &base, args.trials, args.io.seed)?;
    out.write("trials.csv", &trial_log_csv(&result.trials))?;
    out.write("best_config.txt", &hyperparameter_config(&result.best.hp))?;
    if let Some(best) = result.trials.iter().find(|t| t.best) {
        out.say(format!(
            "best trial {} of {}: MSE {:.6}",
            best.trial,
            result.trials.len(),
            best.mse
        ));
    }
    Ok(())
}
