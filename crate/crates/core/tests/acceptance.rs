//! End-to-end acceptance checks, one line per criterion.
//!
//! Runs without the libtest harness so criteria execute sequentially and
//! report in order. Run with `cargo test --test acceptance`.

mod common;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use ndarray::{Array1, Array2};
use ping_gnn::clustering::{
    cluster, core_distances, minimum_spanning_tree, mutual_reachability, ClusterConfig, MutualReachability,
};
use ping_gnn::construction::{build_batched_graphs, build_single_graph, ConstructionConfig, ConstructionMethod};
use ping_gnn::dataset::{load_csv, MissingSpec, PreparedDataset, TabularDataset};
use ping_gnn::gnn::GnnModel;
use ping_gnn::graph::PingGraph;
use ping_gnn::neural::{
    flatten, gradient_check, unflatten, Activation, Aggregation, Hyperparameters, Mlp, TrainOptions,
};
use ping_gnn::pipeline::{
    build_representation, evaluate_folds, evaluate_split, missing_sweep, random_search_tune, run_experiment,
    run_experiment_traced, ExperimentConfig, Method, Representation,
};
use ping_gnn::seed;
use ping_gnn::synthetic::{neighborhood_dataset, NeighborhoodSpec};
use proptest::prelude::*;
use proptest::test_runner::{Config as ProptestConfig, TestRunner};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Epochs for the tuned comparison; see README for the runtime budget.
const COMPARISON_EPOCHS: usize = 60;
const COMPARISON_TRIALS: usize = 20;
const SWEEP_EPOCHS: usize = 100;

enum Status {
    Pass,
    Fail,
    /// Required input is absent; reported as a failure but kept apart.
    Unavailable,
}

struct Outcome {
    status: Status,
    detail: String,
}

impl Outcome {
    fn check(ok: bool, detail: impl Into<String>) -> Self {
        Self {
            status: if ok { Status::Pass } else { Status::Fail },
            detail: detail.into(),
        }
    }
}

fn gaussian_blobs(rng: &mut impl Rng, s: usize, f: usize, blobs: usize, spread: f64) -> Array2<f64> {
    let centers: Vec<Vec<f64>> = (0..blobs)
        .map(|_| {
            (0..f)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    spread * z
                })
                .collect::<Vec<f64>>()
        })
        .collect();
    Array2::from_shape_fn((s, f), |(i, j)| {
        let noise: f64 = StandardNormal.sample(rng);
        centers[i % blobs][j] + noise
    })
}

fn random_prepared(seed_value: u64, s: usize, f: usize) -> PreparedDataset {
    let mut rng = seed::rng(seed_value);
    let x = gaussian_blobs(&mut rng, s, f, 3, 4.0);
    let y = Array1::from_shape_fn(s, |i| x.row(i).sum());
    PreparedDataset::prepare(&TabularDataset::from_arrays(x, y).unwrap()).unwrap()
}

fn edge_set(g: &PingGraph) -> BTreeSet<(usize, usize)> {
    g.edges().iter().map(|&(a, b)| (a.min(b), a.max(b))).collect()
}

fn construction_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = seed::rng(101);
    let mut mismatches = Vec::new();
    for case in 0..20 {
        let s = rng.random_range(10..=60);
        let f = rng.random_range(2..=20);
        let n = rng.random_range(1..=5);
        let prepared = random_prepared(1000 + case, s, f);
        let all: Vec<usize> = (0..s).collect();
        let cfg = ConstructionConfig {
            n_neighbors: n,
            method: ConstructionMethod::Sgc,
        };
        let g = build_single_graph(&prepared, &cfg).unwrap();
        if edge_set(&g) != common::brute_force_edges(prepared.features(), &all, n) {
            mismatches.push(format!("sgc case {case}"));
        }
        let clusters = cluster(prepared.features(), &ClusterConfig::new(5)).unwrap();
        let bgc = ConstructionConfig {
            method: ConstructionMethod::Bgc,
            ..cfg
        };
        let (batch, _) = build_batched_graphs(&prepared, &bgc, &clusters).unwrap();
        let mut covered = vec![0; s];
        for g in batch.graphs() {
            let members = g.node_global_ids();
            members.iter().for_each(|&i| covered[i] += 1);
            let local_n = n.min(members.len() - 1);
            if edge_set(g) != common::brute_force_edges(prepared.features(), members, local_n) {
                mismatches.push(format!("bgc case {case}"));
            }
        }
        if covered.iter().any(|&c| c != 1) {
            mismatches.push(format!("bgc case {case} does not partition samples"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::check(
        mismatches.is_empty() && secs < 10.0,
        format!("20 datasets, mismatches {mismatches:?}, {secs:.2}s (limit 10s)"),
    )
}

fn graph_invariants() -> Outcome {
    let mut runner = TestRunner::new(ProptestConfig {
        cases: 200,
        failure_persistence: None,
        ..ProptestConfig::default()
    });
    let strategy = (8usize..=60, 2usize..=12, 1usize..=5, any::<bool>(), any::<u64>());
    let result = runner.run(&strategy, |(s, f, n, batched, data_seed)| {
        let prepared = random_prepared(data_seed, s, f);
        let graphs = if batched {
            let clusters = cluster(prepared.features(), &ClusterConfig::new(4)).unwrap();
            let cfg = ConstructionConfig {
                n_neighbors: n,
                method: ConstructionMethod::Bgc,
            };
            build_batched_graphs(&prepared, &cfg, &clusters)
                .unwrap()
                .0
                .graphs()
                .to_vec()
        } else {
            let cfg = ConstructionConfig {
                n_neighbors: n,
                method: ConstructionMethod::Sgc,
            };
            vec![build_single_graph(&prepared, &cfg).unwrap()]
        };
        for g in &graphs {
            let report = g.validate();
            prop_assert!(report.is_valid(), "{report}");
            prop_assert!(g.initial_edge_weights().iter().all(|&w| w == 1.0));
            let floor = n.min(g.n_nodes() - 1);
            prop_assert!(g.degrees().iter().all(|&d| d >= floor), "degree below {floor}");
        }
        Ok(())
    });
    match result {
        Ok(()) => Outcome::check(true, "200 random configurations valid"),
        Err(e) => Outcome::check(false, format!("{e}")),
    }
}

/// Summing in ascending order makes totals of the same edge set bit-equal.
fn sorted_sum(mut weights: Vec<f64>) -> f64 {
    weights.sort_by(f64::total_cmp);
    weights.iter().sum()
}

/// Minimum spanning-tree weight by trying every (n−1)-edge subset.
fn exhaustive_mst_weight(mr: &MutualReachability) -> f64 {
    let n = mr.len();
    let edges: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut best = f64::INFINITY;
    let mut chosen = Vec::with_capacity(n - 1);
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    fn search(
        edges: &[(usize, usize)],
        start: usize,
        n: usize,
        mr: &MutualReachability,
        chosen: &mut Vec<usize>,
        best: &mut f64,
    ) {
        if chosen.len() == n - 1 {
            let mut parent: Vec<usize> = (0..n).collect();
            let mut weights = Vec::with_capacity(n - 1);
            for &e in chosen.iter() {
                let (a, b) = edges[e];
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra == rb {
                    return;
                }
                parent[ra] = rb;
                weights.push(mr.get(a, b));
            }
            *best = best.min(sorted_sum(weights));
            return;
        }
        for e in start..edges.len() {
            chosen.push(e);
            search(edges, e + 1, n, mr, chosen, best);
            chosen.pop();
        }
    }
    search(&edges, 0, n, mr, &mut chosen, &mut best);
    best
}

fn clustering() -> Outcome {
    let mut rng = seed::rng(303);
    let centers = [[0.0, 0.0, 0.0], [12.0, 0.0, 0.0], [0.0, 12.0, 0.0]];
    let x = Array2::from_shape_fn((120, 3), |(i, j)| {
        let noise: f64 = StandardNormal.sample(&mut rng);
        centers[i / 40][j] + noise
    });
    let assignment = cluster(x.view(), &ClusterConfig::new(10)).unwrap();
    let truth: Vec<usize> = (0..120).map(|i| i / 40).collect();
    let mut pure = 0;
    for members in assignment.members() {
        let mut counts = [0usize; 3];
        members.iter().for_each(|&i| counts[truth[i]] += 1);
        pure += counts.iter().max().copied().unwrap_or(0);
    }
    let purity = pure as f64 / 120.0;

    let mut mst_mismatch = Vec::new();
    for n in 3..=8 {
        for variant in 0..2u64 {
            let pts = Array2::from_shape_fn((n, 2), |_| rng.random_range(-5.0..5.0));
            let mr = if variant == 0 {
                let core = core_distances(pts.view(), 2).unwrap();
                mutual_reachability(pts.view(), &core)
            } else {
                let mut m = Array2::zeros((n, n));
                for i in 0..n {
                    for j in i + 1..n {
                        let w = rng.random_range(0.0..10.0);
                        m[[i, j]] = w;
                        m[[j, i]] = w;
                    }
                }
                MutualReachability::from_matrix(m)
            };
            let prim = sorted_sum(minimum_spanning_tree(&mr).iter().map(|e| e.weight).collect());
            let exhaustive = exhaustive_mst_weight(&mr);
            if prim != exhaustive {
                mst_mismatch.push((n, variant, prim, exhaustive));
            }
        }
    }
    Outcome::check(
        assignment.num_clusters == 3 && purity >= 0.95 && mst_mismatch.is_empty(),
        format!(
            "{} clusters, purity {purity:.3}; MST mismatches on 3..=8 nodes: {mst_mismatch:?}",
            assignment.num_clusters
        ),
    )
}

fn gradient_correctness() -> Outcome {
    let start = Instant::now();
    let mut rng = seed::rng(404);
    let x = Array2::from_shape_fn((6, 3), |_| rng.random_range(-1.0..1.0));
    let y = Array1::from_shape_fn(6, |_| rng.random_range(-1.0..1.0));
    let g = PingGraph::new(
        x.clone(),
        y.clone(),
        (0..6).collect(),
        vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 3), (1, 5)],
    )
    .unwrap();
    let mask = [true, true, false, true, true, true];
    let mut worst: Vec<String> = Vec::new();
    let mut ok = true;
    for aggregation in Aggregation::ALL {
        let hp = Hyperparameters {
            hidden_dim: 25,
            activation: Activation::Elu,
            scorer_activation: Activation::Elu,
            aggregation,
            dropout: 0.0,
            ..Hyperparameters::default()
        };
        let mut model = GnnModel::new(3, &hp, 7);
        // A nonzero scorer so edge weights differ and their gradients matter.
        model.scorer.layer.weights.mapv_inplace(|_| rng.random_range(-0.5..0.5));
        model.scorer.layer.bias[0] = 0.2;
        let theta = flatten(&model);
        let (_, grad) = model.loss_and_grad(&g, &mask, None).unwrap();
        let report = gradient_check(
            |t| {
                unflatten(&mut model, t);
                model.loss_and_grad(&g, &mask, None).unwrap().0
            },
            &theta,
            &flatten(&grad),
        );
        ok &= report.passes(1e-4);
        worst.push(format!("ssgnn/{aggregation} {:.2e}", report.max_rel_error));
    }
    let hp = Hyperparameters {
        hidden_dim: 25,
        activation: Activation::Elu,
        dropout: 0.0,
        ..Hyperparameters::default()
    };
    let mut mlp = Mlp::new(3, &hp, 7);
    let keys: Vec<usize> = (0..6).collect();
    let theta = flatten(&mlp);
    let (_, grad) = mlp.loss_and_grad(x.view(), &y, &mask, &keys, None).unwrap();
    let report = gradient_check(
        |t| {
            unflatten(&mut mlp, t);
            mlp.loss_and_grad(x.view(), &y, &mask, &keys, None).unwrap().0
        },
        &theta,
        &flatten(&grad),
    );
    ok &= report.passes(1e-4);
    worst.push(format!("dnn {:.2e}", report.max_rel_error));
    let secs = start.elapsed().as_secs_f64();
    Outcome::check(
        ok && secs < 30.0,
        format!("max relative error {} (limit 1e-4), {secs:.2}s", worst.join(", ")),
    )
}

fn reduction_identity() -> Outcome {
    let spec = NeighborhoodSpec {
        neighborhoods: 30,
        per_neighborhood: 5,
        ..NeighborhoodSpec::standard(5)
    };
    let d = neighborhood_dataset(&spec).unwrap().dataset;
    let prepared = PreparedDataset::prepare(&d).unwrap();
    let hp = Hyperparameters {
        hidden_dim: 40,
        epochs: 50,
        dropout: 0.2,
        aggregation: Aggregation::Mean,
        seed: 9,
        ..Hyperparameters::default()
    };
    let cfg = ExperimentConfig::new(Method::Dnn, 9);
    let folds = cfg.fold_plan(prepared.n_samples()).unwrap();
    let s = prepared.n_samples();
    let edgeless = PingGraph::edgeless(
        prepared.features().to_owned(),
        prepared.target().clone(),
        (0..s).collect(),
    )
    .unwrap();
    let frozen = TrainOptions { freeze_scorer: true };
    let dnn = evaluate_folds(
        &prepared,
        &Representation::Features,
        &hp,
        &folds,
        TrainOptions::default(),
    )
    .unwrap();
    let gnn = evaluate_folds(&prepared, &Representation::Graph(edgeless), &hp, &folds, frozen).unwrap();
    let diff = dnn
        .per_fold_mse
        .iter()
        .zip(&gnn.per_fold_mse)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Outcome::check(diff <= 1e-9, format!("max per-fold |ΔMSE| = {diff:.3e} (limit 1e-9)"))
}

fn directional_claim() -> Outcome {
    let start = Instant::now();
    let mut means = [Vec::new(), Vec::new()];
    for s in 0..3u64 {
        let d = neighborhood_dataset(&NeighborhoodSpec::standard(s)).unwrap().dataset;
        for (slot, method) in [Method::Ssgnn, Method::Dnn].into_iter().enumerate() {
            let mut base = ExperimentConfig::new(method, s);
            base.hp.epochs = COMPARISON_EPOCHS;
            let tuned = random_search_tune(&d, &base, COMPARISON_TRIALS, s).unwrap();
            means[slot].push(run_experiment(&d, &tuned.best).unwrap().mean_mse);
        }
    }
    let avg = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
    let (gnn, dnn) = (avg(&means[0]), avg(&means[1]));
    let improvement = 1.0 - gnn / dnn;
    let secs = start.elapsed().as_secs_f64();
    Outcome::check(
        improvement >= 0.15 && secs < 900.0,
        format!(
            "ssgnn {gnn:.4} vs dnn {dnn:.4} mean MSE over 3 seeds: {:.1}% better (need 15%), {secs:.0}s (limit 900s)",
            100.0 * improvement
        ),
    )
}

fn missing_data_protocol() -> Outcome {
    let rates = MissingSpec::SWEEP_RATES;
    let mut per_rate = vec![0.0; rates.len()];
    let mut count_errors = Vec::new();
    let mut report_counts = Vec::new();
    for s in 0..3u64 {
        let spec = NeighborhoodSpec::standard(s);
        let d = neighborhood_dataset(&spec).unwrap().dataset;
        let mut cfg = ExperimentConfig::new(Method::Ssgnn, s);
        cfg.hp.epochs = SWEEP_EPOCHS;
        let reports = missing_sweep(&d, &cfg, &rates).unwrap();
        report_counts.push(reports.len());
        for (i, r) in reports.iter().enumerate() {
            let expected = (rates[i] * spec.n_samples() as f64 * spec.n_features() as f64).round() as usize;
            if r.corrupted_cells != expected {
                count_errors.push((rates[i], r.corrupted_cells, expected));
            }
            per_rate[i] += r.mean_mse / 3.0;
        }
    }
    let inversions = per_rate.windows(2).filter(|w| w[1] < w[0]).count();
    let degraded = per_rate[rates.len() - 1] > per_rate[0];
    Outcome::check(
        report_counts.iter().all(|&c| c == 6) && count_errors.is_empty() && degraded && inversions <= 1,
        format!(
            "reports per sweep {report_counts:?}, count errors {count_errors:?}, mean MSE by rate {:?}, {inversions} inversion(s)",
            per_rate.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>()
        ),
    )
}

fn cross_validation_hygiene() -> Outcome {
    let spec = NeighborhoodSpec {
        neighborhoods: 30,
        per_neighborhood: 5,
        ..NeighborhoodSpec::standard(8)
    };
    let d = neighborhood_dataset(&spec).unwrap().dataset;
    let s = d.n_samples();
    let mut problems = Vec::new();
    let mut experiments = 0;
    for method in Method::ALL {
        for rate in [0.0, 0.15] {
            let mut cfg = ExperimentConfig::new(method, 21);
            cfg.hp.epochs = 15;
            cfg.hp.dropout = 0.2;
            cfg.cluster = ClusterConfig::new(5);
            cfg.missing.rate = rate;
            let (_, traces) = run_experiment_traced(&d, &cfg).unwrap();
            experiments += 1;
            let mut tested = vec![0; s];
            for t in &traces {
                let test: BTreeSet<usize> = t.test_ids.iter().copied().collect();
                test.iter().for_each(|&i| tested[i] += 1);
                if t.loss_ids.iter().any(|i| test.contains(i)) {
                    problems.push(format!("{method}/{rate}: test row in loss, fold {}", t.fold));
                }
                if t.regression_ids.iter().any(|i| test.contains(i)) {
                    problems.push(format!("{method}/{rate}: test row in regression, fold {}", t.fold));
                }
                if t.regression_ids.len() + test.len() != s {
                    problems.push(format!("{method}/{rate}: fold {} is not a split", t.fold));
                }
            }
            if tested.iter().any(|&c| c != 1) {
                problems.push(format!("{method}/{rate}: folds do not partition samples"));
            }
        }
        // Blank test targets: training must not notice.
        let mut cfg = ExperimentConfig::new(method, 22);
        cfg.hp.epochs = 15;
        cfg.cluster = ClusterConfig::new(5);
        let prepared = PreparedDataset::prepare(&d).unwrap();
        let folds = cfg.fold_plan(s).unwrap();
        let (repr, _, _) = build_representation(&prepared, &cfg).unwrap();
        for fold in 0..folds.k() {
            let mut y = d.target().clone();
            folds.test_indices(fold).into_iter().for_each(|i| y[i] = f64::NAN);
            let poisoned = TabularDataset::new(d.features().to_owned(), y, d.feature_names().to_vec()).unwrap();
            let poisoned = PreparedDataset::prepare(&poisoned).unwrap();
            let (poisoned_repr, _, _) = build_representation(&poisoned, &cfg).unwrap();
            let opts = TrainOptions::default();
            let (_, clean_curve, _) = evaluate_split(&prepared, &repr, &cfg.hp, &folds, fold, opts).unwrap();
            let (_, curve, _) = evaluate_split(&poisoned, &poisoned_repr, &cfg.hp, &folds, fold, opts).unwrap();
            if curve != clean_curve || curve.iter().any(|v| !v.is_finite()) {
                problems.push(format!("{method}: blanked test targets changed training, fold {fold}"));
            }
        }
    }
    Outcome::check(
        problems.is_empty(),
        format!("{experiments} traced experiments plus target blanking per method: {problems:?}"),
    )
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ping-gnn"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::TempDir::new().unwrap();
    let spec = NeighborhoodSpec {
        neighborhoods: 30,
        per_neighborhood: 5,
        ..NeighborhoodSpec::standard(31)
    };
    let csv = dir.path().join("data.csv");
    common::write_csv(&csv, &neighborhood_dataset(&spec).unwrap().dataset);
    let csv = csv.to_str().unwrap().to_string();
    let common_flags = ["--input", csv.as_str(), "--target", "y", "--seed", "13"];
    let commands: Vec<(&str, Vec<&str>)> = vec![
        ("build-graph", vec!["--neighbors", "4"]),
        ("build-graph", vec!["--method", "bgc", "--min-cluster-size", "5"]),
        ("run", vec!["--method", "ssgnn", "--epochs", "10", "--dropout", "0.3"]),
        (
            "run",
            vec![
                "--method",
                "ssbgnn",
                "--epochs",
                "10",
                "--min-cluster-size",
                "5",
                "--aggregation",
                "pool",
            ],
        ),
        (
            "run",
            vec![
                "--method",
                "dnn",
                "--epochs",
                "10",
                "--missing-rate",
                "0.1",
                "--dropout",
                "0.5",
            ],
        ),
        (
            "sweep",
            vec!["--method", "ssgnn", "--epochs", "5", "--rates", "0,0.1,0.2"],
        ),
        ("tune", vec!["--method", "ssgnn", "--epochs", "5", "--trials", "3"]),
    ];
    let mut compared = 0;
    let mut problems = Vec::new();
    for (i, (cmd, extra)) in commands.iter().enumerate() {
        let first = dir.path().join(format!("first{i}"));
        let second = dir.path().join(format!("second{i}"));
        let mut args = vec![*cmd];
        args.extend(common_flags);
        args.extend(extra.iter().copied());
        let first_s = first.to_str().unwrap().to_string();
        args.extend(["--out", first_s.as_str()]);
        let manifest = first.join("manifest.json");
        let replay = run_cli(&args).and_then(|()| {
            run_cli(&[
                "replay",
                "--manifest",
                manifest.to_str().unwrap(),
                "--out",
                second.to_str().unwrap(),
            ])
        });
        if let Err(e) = replay {
            problems.push(e);
            continue;
        }
        let recorded = ping_gnn::cli::RunManifest::load(&manifest).unwrap();
        for name in recorded
            .outputs
            .iter()
            .filter(|n| *n != "manifest.json" && !n.starts_with("timings"))
        {
            compared += 1;
            if std::fs::read(first.join(name)).ok() != std::fs::read(second.join(name)).ok() {
                problems.push(format!("{cmd} {name} differs on replay"));
            }
        }
    }
    Outcome::check(
        problems.is_empty() && compared > 0,
        format!(
            "{} commands replayed, {compared} output files compared: {problems:?}",
            commands.len()
        ),
    )
}

/// Accepts the UCI distribution file (whitespace-separated, no header) or a
/// CSV with a header whose last column is the target.
fn load_airfoil(dir: &Path) -> Option<(PathBuf, TabularDataset)> {
    let dat = dir.join("airfoil_self_noise.dat");
    if let Ok(text) = std::fs::read_to_string(&dat) {
        let rows: Vec<Vec<f64>> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.split_whitespace().map(|v| v.parse().unwrap()).collect())
            .collect();
        let x = Array2::from_shape_fn((rows.len(), 5), |(i, j)| rows[i][j]);
        let y = Array1::from_shape_fn(rows.len(), |i| rows[i][5]);
        return Some((dat, TabularDataset::from_arrays(x, y).unwrap()));
    }
    let csv = dir.join("airfoil_self_noise.csv");
    let header = std::fs::read_to_string(&csv).ok()?;
    let target = header.lines().next()?.split(',').next_back()?.trim().to_string();
    let (d, _) = load_csv(&csv, &target).unwrap();
    Some((csv, d))
}

fn run_three_methods(d: &TabularDataset) -> (Vec<String>, bool, bool, f64) {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut finite = true;
    let mut small_warning = false;
    for method in Method::ALL {
        let report = run_experiment(d, &ExperimentConfig::new(method, 0)).unwrap();
        finite &= report.per_fold_mse.iter().all(|v| v.is_finite());
        if method == Method::Ssbgnn {
            small_warning = report.warnings.iter().any(|w| w.contains("600"));
        }
        lines.push(format!("{method} {:.4}", report.mean_mse));
    }
    (lines, finite, small_warning, start.elapsed().as_secs_f64())
}

fn public_data_smoke() -> Outcome {
    let data_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let Some((path, d)) = load_airfoil(&data_dir) else {
        // Same shape, synthetic values: shows the time budget only.
        let mut rng = seed::rng(1503);
        let x = gaussian_blobs(&mut rng, 1503, 5, 6, 3.0);
        let y = Array1::from_shape_fn(1503, |i| x.row(i).iter().map(|v| v.sin()).sum());
        let (_, _, _, secs) = run_three_methods(&TabularDataset::from_arrays(x, y).unwrap());
        return Outcome {
            status: Status::Unavailable,
            detail: format!(
                "data/airfoil_self_noise.dat (or .csv) not found; a synthetic 1503x6 stand-in ran all three \
                 methods at 500 epochs in {secs:.0}s, which does not substitute for the real data"
            ),
        };
    };
    let (lines, finite, small_warning, secs) = run_three_methods(&d);
    Outcome::check(
        d.n_samples() == 1503 && finite && !small_warning && secs < 1800.0,
        format!(
            "{}: {} samples, mean MSE {}, ssbgnn small-data warning {small_warning}, {secs:.0}s (limit 1800s)",
            path.display(),
            d.n_samples(),
            lines.join(", ")
        ),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("construction matches brute-force oracle", construction_oracle),
        ("graph invariants", graph_invariants),
        ("clustering recovery and MST optimality", clustering),
        ("gradient correctness", gradient_correctness),
        ("edgeless reduction to the perceptron", reduction_identity),
        ("graph model beats perceptron after tuning", directional_claim),
        ("missing-data sweep", missing_data_protocol),
        ("cross-validation hygiene", cross_validation_hygiene),
        ("replay determinism", determinism),
        ("public-data smoke run", public_data_smoke),
    ];
    let (mut passed, mut failed, mut unavailable) = (0, 0, 0);
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Outcome::check(false, "panicked"));
        let label = match outcome.status {
            Status::Pass => {
                passed += 1;
                "PASS"
            }
            Status::Fail => {
                failed += 1;
                "FAIL"
            }
            Status::Unavailable => {
                unavailable += 1;
                "FAIL"
            }
        };
        println!(
            "criterion {:>2} {label} {name} ({:.1}s): {}",
            i + 1,
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
    }
    println!("acceptance: {passed} passed, {failed} failed, {unavailable} failed for missing input data");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
