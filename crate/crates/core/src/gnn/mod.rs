//! Self-supervised graph regressor: an edge scorer that refines edge weights
//! from endpoint features, two GraphSAGE-style layers, and a linear head.
//! Backpropagation reaches the edge scorer through the aggregation weights.

mod model;
mod sage;
mod scorer;
mod train;

pub use model::{GnnCache, GnnModel};
pub use sage::{aggregate, SageLayer};
pub use scorer::EdgeScorer;
pub use train::{extract_batch_embeddings, extract_embeddings, train_batched, train_transductive};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphBatch, PingGraph};
    use crate::neural::{
        flatten, gradient_check, train_mlp, unflatten, Activation, Aggregation, Hyperparameters, Parameters,
        TrainOptions,
    };
    use crate::seed;
    use ndarray::{Array1, Array2};
    use rand::Rng;

    fn random_matrix(rows: usize, cols: usize, s: u64) -> Array2<f64> {
        let mut rng = seed::rng(s);
        Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-1.0..1.0))
    }

    fn small_graph(s: u64) -> PingGraph {
        let x = random_matrix(6, 3, s);
        let y = random_matrix(6, 1, s + 1).column(0).to_owned();
        let edges = vec![(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (1, 5), (4, 5)];
        PingGraph::new(x, y, (0..6).collect(), edges).unwrap()
    }

    fn hp(aggregation: Aggregation) -> Hyperparameters {
        Hyperparameters {
            hidden_dim: 25,
            aggregation,
            activation: Activation::Elu,
            scorer_activation: Activation::Elu,
            dropout: 0.0,
            epochs: 1,
            ..Hyperparameters::default()
        }
    }

    fn randomize_scorer(model: &mut GnnModel, s: u64) {
        let mut rng = seed::rng(s);
        model.scorer.layer.weights.mapv_inplace(|_| rng.random_range(-0.5..0.5));
        model.scorer.layer.bias[0] = 0.2;
        for layer in &mut model.layers {
            layer.bias.mapv_inplace(|_| rng.random_range(-0.3..0.3));
        }
    }

    #[test]
    fn full_model_gradient_check() {
        for aggregation in Aggregation::ALL {
            let g = small_graph(3);
            let mask = [true, true, false, true, true, true];
            let mut model = GnnModel::new(3, &hp(aggregation), 5);
            randomize_scorer(&mut model, 8);
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
            assert!(report.passes(1e-4), "{aggregation}: {report:?}");
        }
    }

    #[test]
    fn zero_scorer_gives_unit_weights_and_positive_after_training() {
        let g = small_graph(1);
        let model = GnnModel::new(3, &hp(Aggregation::Mean), 2);
        let cache = model.forward(&g, None).unwrap();
        assert!(cache.edge_weights().iter().all(|&w| w == 1.0));
        let trained = train_transductive(
            model,
            &g,
            &[true; 6],
            &Hyperparameters {
                epochs: 30,
                ..hp(Aggregation::Mean)
            },
            2,
            TrainOptions::default(),
        )
        .unwrap();
        let w = trained.model.forward(&g, None).unwrap().edge_weights().to_vec();
        assert!(w.iter().all(|&x| x > 0.0));
        assert!(w.iter().any(|&x| x != 1.0), "scorer never moved");
    }

    fn permuted(g: &PingGraph, perm: &[usize]) -> PingGraph {
        // node v of `g` becomes node perm[v]
        let n = g.n_nodes();
        let mut x = Array2::zeros((n, g.n_features()));
        let mut y = Array1::zeros(n);
        let mut ids = vec![0; n];
        for v in 0..n {
            x.row_mut(perm[v]).assign(&g.node_features().row(v));
            y[perm[v]] = g.node_targets()[v];
            ids[perm[v]] = g.node_global_ids()[v];
        }
        let edges: Vec<_> = g.edges().iter().map(|&(i, j)| (perm[i], perm[j])).collect();
        PingGraph::new(x, y, ids, edges).unwrap()
    }

    #[test]
    fn permutation_equivariant() {
        let perm = [3, 0, 5, 1, 4, 2];
        for aggregation in Aggregation::ALL {
            let g = small_graph(11);
            let p = permuted(&g, &perm);
            let mut model = GnnModel::new(3, &hp(aggregation), 9);
            randomize_scorer(&mut model, 4);
            let a = model.predict(&g).unwrap();
            let b = model.predict(&p).unwrap();
            for v in 0..6 {
                assert!((a[v] - b[perm[v]]).abs() < 1e-12, "{aggregation}");
            }
            let ea = extract_embeddings(&model, &g).unwrap();
            let eb = extract_embeddings(&model, &p).unwrap();
            for (x, y) in ea.iter().zip(&eb) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identical_nodes_identical_predictions() {
        let x = Array2::from_elem((5, 3), 0.4);
        let edges = vec![(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)];
        let g = PingGraph::new(x, Array1::zeros(5), (0..5).collect(), edges).unwrap();
        for aggregation in Aggregation::ALL {
            let pred = GnnModel::new(3, &hp(aggregation), 1).predict(&g).unwrap();
            assert!(pred.iter().all(|&p| p == pred[0]));
        }
    }

    #[test]
    fn edgeless_gcn_is_a_per_node_network() {
        // With no neighbors, gcn aggregates a node to itself, so each node's
        // output depends only on its own features.
        let x = random_matrix(4, 3, 2);
        let g = PingGraph::edgeless(x.clone(), Array1::zeros(4), (0..4).collect()).unwrap();
        let model = GnnModel::new(3, &hp(Aggregation::Gcn), 6);
        let full = model.predict(&g).unwrap();
        for v in 0..4 {
            let single = PingGraph::edgeless(
                x.row(v).to_owned().insert_axis(ndarray::Axis(0)),
                Array1::zeros(1),
                vec![0],
            )
            .unwrap();
            assert_eq!(model.predict(&single).unwrap()[0], full[v]);
        }
    }

    #[test]
    fn edgeless_mean_with_frozen_scorer_matches_perceptron() {
        let x = random_matrix(30, 4, 21);
        let y = random_matrix(30, 1, 22).column(0).to_owned();
        let mask: Vec<bool> = (0..30).map(|i| i % 4 != 0).collect();
        let ids: Vec<usize> = (0..30).collect();
        let h = Hyperparameters {
            dropout: 0.2,
            activation: Activation::Relu,
            epochs: 25,
            ..hp(Aggregation::Mean)
        };
        let g = PingGraph::edgeless(x.clone(), y.clone(), ids.clone()).unwrap();
        let gnn = train_transductive(
            GnnModel::new(4, &h, 13),
            &g,
            &mask,
            &h,
            13,
            TrainOptions { freeze_scorer: true },
        )
        .unwrap();
        let mlp = train_mlp(x.view(), &y, &mask, &ids, &h, 13).unwrap();
        assert_eq!(gnn.loss_history, mlp.loss_history);
        assert_eq!(
            extract_embeddings(&gnn.model, &g).unwrap(),
            mlp.model.embeddings(x.view()).unwrap()
        );
    }

    #[test]
    fn zero_epochs_and_determinism() {
        let g = small_graph(5);
        let h0 = Hyperparameters {
            epochs: 0,
            ..hp(Aggregation::Pool)
        };
        let init = GnnModel::new(3, &h0, 3);
        let out = train_transductive(init.clone(), &g, &[true; 6], &h0, 3, TrainOptions::default()).unwrap();
        assert!(out.loss_history.is_empty());
        assert_eq!(out.model, init);

        let h = Hyperparameters {
            epochs: 20,
            dropout: 0.3,
            ..hp(Aggregation::Pool)
        };
        let run =
            || train_transductive(GnnModel::new(3, &h, 3), &g, &[true; 6], &h, 3, TrainOptions::default()).unwrap();
        let (a, b) = (run(), run());
        assert_eq!(a.loss_history, b.loss_history);
        assert_eq!(a.model, b.model);
    }

    #[test]
    fn empty_mask_rejected() {
        let g = small_graph(5);
        let h = hp(Aggregation::Mean);
        let r = train_transductive(GnnModel::new(3, &h, 1), &g, &[false; 6], &h, 1, TrainOptions::default());
        assert!(matches!(r, Err(crate::Error::EmptyMask)));
    }

    #[test]
    fn single_graph_batch_matches_transductive() {
        let g = small_graph(7);
        let h = Hyperparameters {
            epochs: 15,
            dropout: 0.25,
            ..hp(Aggregation::Gcn)
        };
        let mask = [true, false, true, true, false, true];
        let t = train_transductive(GnnModel::new(3, &h, 4), &g, &mask, &h, 4, TrainOptions::default()).unwrap();
        let batch = GraphBatch::new(vec![g], 6).unwrap();
        let b = train_batched(GnnModel::new(3, &h, 4), &batch, &mask, &h, 4, TrainOptions::default()).unwrap();
        assert_eq!(t.loss_history, b.loss_history);
        assert_eq!(t.model, b.model);
        assert_eq!(t.loss_ids, b.loss_ids);
    }

    #[test]
    fn two_identical_graphs_equal_double_stepping() {
        let g = small_graph(9);
        let mut ids2 = Vec::new();
        for v in 0..6 {
            ids2.push(v + 6);
        }
        let twin = PingGraph::new(
            g.node_features().to_owned(),
            g.node_targets().clone(),
            ids2,
            g.edges().to_vec(),
        )
        .unwrap();
        let h = Hyperparameters {
            epochs: 10,
            ..hp(Aggregation::Mean)
        };
        let batch = GraphBatch::new(vec![g.clone(), twin], 12).unwrap();
        let b = train_batched(
            GnnModel::new(3, &h, 2),
            &batch,
            &[true; 12],
            &h,
            2,
            TrainOptions::default(),
        )
        .unwrap();
        let h2 = Hyperparameters { epochs: 20, ..h };
        let t = train_transductive(GnnModel::new(3, &h, 2), &g, &[true; 6], &h2, 2, TrainOptions::default()).unwrap();
        assert_eq!(flatten(&b.model), flatten(&t.model));
    }

    #[test]
    fn learns_neighbor_mean_target() {
        let n = 80;
        let x = random_matrix(n, 4, 31);
        let latent: Vec<f64> = (0..n).map(|v| x[[v, 0]] - 0.5 * x[[v, 2]]).collect();
        let mut edges = Vec::new();
        let mut rng = seed::rng(32);
        for v in 0..n {
            edges.push((v, (v + 1) % n));
            let u = rng.random_range(0..n);
            if u != v {
                edges.push((v, u));
            }
        }
        let g0 = PingGraph::new(x.clone(), Array1::zeros(n), (0..n).collect(), edges).unwrap();
        let mut y = Array1::zeros(n);
        for (v, yv) in y.iter_mut().enumerate() {
            let nbrs: Vec<usize> = g0
                .edges()
                .iter()
                .filter_map(|&(i, j)| (i == v).then_some(j).or((j == v).then_some(i)))
                .collect();
            *yv = nbrs.iter().map(|&u| latent[u]).sum::<f64>() / nbrs.len() as f64;
        }
        let g = g0.with_targets(y).unwrap();
        let h = Hyperparameters {
            epochs: 300,
            activation: Activation::Relu,
            learning_rate: 0.005,
            ..hp(Aggregation::Mean)
        };
        let mask: Vec<bool> = (0..n).map(|v| v % 5 != 0).collect();
        let out = train_transductive(GnnModel::new(4, &h, 1), &g, &mask, &h, 1, TrainOptions::default()).unwrap();
        let first = out.loss_history[0];
        let last = *out.loss_history.last().unwrap();
        assert!(last * 10.0 <= first, "{first} -> {last}");
        assert_eq!(out.model.n_params(), flatten(&out.model).len());
    }

    #[test]
    fn checkpoint_round_trip() {
        for aggregation in Aggregation::ALL {
            let mut model = GnnModel::new(3, &hp(aggregation), 5);
            randomize_scorer(&mut model, 1);
            let text = model.to_checkpoint().to_json().unwrap();
            let back = GnnModel::from_checkpoint(&crate::neural::Checkpoint::from_json(&text).unwrap()).unwrap();
            assert_eq!(back, model);
        }
    }
}
