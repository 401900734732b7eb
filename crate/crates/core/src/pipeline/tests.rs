use super::*;
use crate::synthetic::{neighborhood_dataset, NeighborhoodSpec};

fn small_spec(seed: u64) -> NeighborhoodSpec {
    NeighborhoodSpec {
        neighborhoods: 20,
        per_neighborhood: 5,
        ..NeighborhoodSpec::standard(seed)
    }
}

fn quick_cfg(method: Method, seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(method, seed);
    cfg.hp.hidden_dim = 25;
    cfg.hp.epochs = 20;
    cfg.cluster = ClusterConfig::new(5);
    cfg
}

fn strip_timings(mut r: EvalReport) -> EvalReport {
    r.construction_seconds = 0.0;
    r.train_seconds = 0.0;
    r.fold_train_seconds.clear();
    r
}

#[test]
fn five_folds_and_consistent_summary() {
    let d = neighborhood_dataset(&small_spec(1)).unwrap().dataset;
    let r = run_experiment(&d, &quick_cfg(Method::Ssgnn, 2)).unwrap();
    assert_eq!(r.per_fold_mse.len(), 5);
    assert_eq!(r.loss_curves.len(), 5);
    assert!(r.loss_curves.iter().all(|c| c.len() == 20));
    let mean = r.per_fold_mse.iter().sum::<f64>() / 5.0;
    let var = r.per_fold_mse.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 5.0;
    assert!((r.mean_mse - mean).abs() < 1e-12);
    assert!((r.std_mse - var.sqrt()).abs() < 1e-12);
    assert!(r.train_seconds >= 0.0);
}

#[test]
fn batched_method_warns_on_small_data() {
    let d = neighborhood_dataset(&small_spec(3)).unwrap().dataset;
    let r = run_experiment(&d, &quick_cfg(Method::Ssbgnn, 4)).unwrap();
    assert!(r.warnings.iter().any(|w| w.contains("600")), "{:?}", r.warnings);
    assert!(r.mean_mse.is_finite());
}

#[test]
fn reruns_are_identical() {
    let d = neighborhood_dataset(&small_spec(5)).unwrap().dataset;
    for method in Method::ALL {
        let mut cfg = quick_cfg(method, 6);
        cfg.hp.dropout = 0.3;
        let a = run_experiment(&d, &cfg).unwrap();
        let b = run_experiment(&d, &cfg).unwrap();
        assert_eq!(a.metrics_json().unwrap(), b.metrics_json().unwrap());
        assert_eq!(a.loss_curves, b.loss_curves);
    }
}

#[test]
fn traces_never_touch_test_rows() {
    let d = neighborhood_dataset(&small_spec(7)).unwrap().dataset;
    for method in Method::ALL {
        let (_, traces) = run_experiment_traced(&d, &quick_cfg(method, 8)).unwrap();
        let mut covered = vec![0; d.n_samples()];
        for t in &traces {
            for &i in &t.test_ids {
                covered[i] += 1;
                assert!(!t.loss_ids.contains(&i));
                assert!(!t.regression_ids.contains(&i));
            }
        }
        assert!(covered.iter().all(|&c| c == 1));
    }
}

#[test]
fn zero_rate_sweep_matches_clean_run() {
    let d = neighborhood_dataset(&small_spec(9)).unwrap().dataset;
    let cfg = quick_cfg(Method::Dnn, 10);
    let sweep = missing_sweep(&d, &cfg, &[0.0]).unwrap();
    assert_eq!(sweep.len(), 1);
    let clean = run_experiment(&d, &cfg).unwrap();
    assert_eq!(strip_timings(sweep[0].clone()), strip_timings(clean));
}

#[test]
fn sweep_reports_follow_rate_order() {
    let d = neighborhood_dataset(&small_spec(11)).unwrap().dataset;
    let cfg = quick_cfg(Method::Dnn, 12);
    let rates = [0.05, 0.10, 0.15, 0.20, 0.25];
    let reports = missing_sweep(&d, &cfg, &rates).unwrap();
    assert_eq!(reports.len(), 5);
    for (r, &rate) in reports.iter().zip(&rates) {
        assert_eq!(r.missing_rate, rate);
        assert_eq!(r.corrupted_cells, (rate * 100.0 * 8.0_f64).round() as usize);
    }
    let csv = comparison_csv(&reports);
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn single_trial_is_best() {
    let d = neighborhood_dataset(&small_spec(13)).unwrap().dataset;
    let base = quick_cfg(Method::Ssgnn, 14);
    let out = random_search_tune(&d, &base, 1, 15).unwrap();
    assert_eq!(out.trials.len(), 1);
    assert!(out.trials[0].best);
    assert_eq!(out.best.hp, out.trials[0].hp);
    assert_eq!(out.best.hp.epochs, base.hp.epochs);
}

#[test]
fn trial_log_flags_one_best_row() {
    let d = neighborhood_dataset(&small_spec(16)).unwrap().dataset;
    let out = random_search_tune(&d, &quick_cfg(Method::Dnn, 17), 4, 18).unwrap();
    let log = trial_log_csv(&out.trials);
    assert_eq!(log.lines().count(), 5);
    assert_eq!(log.lines().filter(|l| l.ends_with(",true")).count(), 1);
    let best = out.trials.iter().find(|t| t.best).unwrap();
    assert!(out.trials.iter().all(|t| t.mse >= best.mse));
}

#[test]
fn zero_trials_rejected() {
    let d = neighborhood_dataset(&small_spec(19)).unwrap().dataset;
    assert!(random_search_tune(&d, &quick_cfg(Method::Dnn, 1), 0, 1).is_err());
}

#[test]
fn config_validation() {
    let mut cfg = ExperimentConfig::new(Method::Ssbgnn, 0);
    cfg.validate().unwrap();
    cfg.k_folds = 1;
    assert!(cfg.validate().is_err());
    let mut cfg = ExperimentConfig::new(Method::Ssgnn, 0);
    cfg.construction.method = ConstructionMethod::Bgc;
    assert!(cfg.validate().is_err());
    assert_eq!("ssbgnn".parse::<Method>().unwrap(), Method::Ssbgnn);
    assert!("gat".parse::<Method>().is_err());
}
