use std::collections::BTreeMap;

use ndarray::{Array1, Array2, Axis};

use super::sage::{Adjacency, SageCache};
use super::{EdgeScorer, SageLayer};
use crate::error::{Error, Result};
use crate::graph::PingGraph;
use crate::neural::{
    dense_from_records, head_init_seed, layer_init_seed, linear_param_grads, masked_mse, parse_setting, slice1,
    slice1_mut, slice2, slice2_mut, Activation, Aggregation, Checkpoint, DenseLayer, DropoutStream, Hyperparameters,
    Parameters, HIDDEN_LAYERS,
};

/// Edge scorer, two message-passing layers, and a linear prediction head.
#[derive(Debug, Clone, PartialEq)]
pub struct GnnModel {
    pub scorer: EdgeScorer,
    pub layers: Vec<SageLayer>,
    pub head: DenseLayer,
    pub activation: Activation,
    pub dropout: f64,
}

/// Forward-pass intermediates.
#[derive(Debug, Clone)]
pub struct GnnCache {
    scorer: super::scorer::ScorerCache,
    adjacency: Adjacency,
    layers: Vec<SageCache>,
    pub embeddings: Array2<f64>,
    pub predictions: Array1<f64>,
}

impl GnnCache {
    pub fn edge_weights(&self) -> &[f64] {
        &self.scorer.weights
    }
}

impl GnnModel {
    /// Fresh model: zero scorer (all refined weights start at their initial
    /// value) and Glorot-uniform layers. The self transform of layer `l` and
    /// the head use the same init streams as the perceptron baseline.
    pub fn new(in_dim: usize, hp: &Hyperparameters, model_seed: u64) -> Self {
        let mut layers = Vec::with_capacity(HIDDEN_LAYERS);
        let mut fan_in = in_dim;
        for l in 0..HIDDEN_LAYERS {
            let out = hp.hidden_dim;
            layers.push(SageLayer {
                self_weights: DenseLayer::glorot(fan_in, out, layer_init_seed(model_seed, l, 0)).weights,
                neighbor_weights: DenseLayer::glorot(fan_in, out, layer_init_seed(model_seed, l, 1)).weights,
                bias: Array1::zeros(out),
                aggregation: hp.aggregation,
                pool: (hp.aggregation == Aggregation::Pool)
                    .then(|| DenseLayer::glorot(fan_in, fan_in, layer_init_seed(model_seed, l, 2))),
            });
            fan_in = out;
        }
        Self {
            scorer: EdgeScorer::zeros(in_dim, hp.scorer_activation),
            layers,
            head: DenseLayer::glorot(hp.hidden_dim, 1, head_init_seed(model_seed)),
            activation: hp.activation,
            dropout: hp.dropout,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn hidden_dim(&self) -> usize {
        self.head.in_dim()
    }

    pub fn aggregation(&self) -> Aggregation {
        self.layers[0].aggregation
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            scorer: EdgeScorer {
                layer: DenseLayer::zeros(self.scorer.layer.in_dim(), 1),
                activation: self.scorer.activation,
            },
            layers: self.layers.iter().map(SageLayer::zeros_like).collect(),
            head: DenseLayer::zeros(self.head.in_dim(), 1),
            activation: self.activation,
            dropout: self.dropout,
        }
    }

    /// Forward pass over every node of `g`. `dropout` of `None` is evaluation
    /// mode. Dropout masks are keyed by node global id.
    pub fn forward(&self, g: &PingGraph, dropout: Option<DropoutStream>) -> Result<GnnCache> {
        if g.n_features() != self.in_dim() {
            return Err(Error::ShapeMismatch(format!(
                "graph has {} features, model expects {}",
                g.n_features(),
                self.in_dim()
            )));
        }
        let x = g.node_features();
        let scorer = self.scorer.forward(x, g.edges(), g.initial_edge_weights())?;
        let adjacency = Adjacency::new(g.n_nodes(), g.edges());
        let keys = g.node_global_ids();
        let mut h = x.to_owned();
        let mut caches = Vec::with_capacity(self.layers.len());
        for (l, layer) in self.layers.iter().enumerate() {
            let (out, cache) = layer.forward(
                h,
                &adjacency,
                &scorer.weights,
                self.activation,
                (self.dropout, keys, l, dropout),
            );
            caches.push(cache);
            h = out;
        }
        let predictions = self.head.forward_batch(h.view()).column(0).to_owned();
        Ok(GnnCache {
            scorer,
            adjacency,
            layers: caches,
            embeddings: h,
            predictions,
        })
    }

    /// Full parameter gradient given `∂loss/∂predictions`.
    pub fn backward(&self, cache: &GnnCache, d_pred: &Array1<f64>) -> GnnModel {
        let mut grad = self.zeros_like();
        let d_y = d_pred.clone().insert_axis(Axis(1));
        let (dw, db) = linear_param_grads(cache.embeddings.view(), &d_y);
        grad.head = DenseLayer { weights: dw, bias: db };
        let mut d_h = d_y.dot(&self.head.weights);
        let weights = &cache.scorer.weights;
        let mut d_w = vec![0.0; weights.len()];
        for l in (0..self.layers.len()).rev() {
            let (g, d_in) = self.layers[l].backward(
                &cache.layers[l],
                &cache.adjacency,
                weights,
                self.activation,
                d_h,
                &mut d_w,
            );
            grad.layers[l] = g;
            d_h = d_in;
        }
        grad.scorer.layer = self.scorer.backward(&cache.scorer, &d_w);
        grad
    }

    /// Masked MSE over nodes with `train_mask` set, and its gradient.
    pub fn loss_and_grad(
        &self,
        g: &PingGraph,
        train_mask: &[bool],
        dropout: Option<DropoutStream>,
    ) -> Result<(f64, GnnModel)> {
        let cache = self.forward(g, dropout)?;
        let (loss, d_pred) = masked_mse(cache.predictions.view(), g.node_targets().view(), train_mask)?;
        Ok((loss, self.backward(&cache, &d_pred)))
    }

    pub fn predict(&self, g: &PingGraph) -> Result<Array1<f64>> {
        Ok(self.forward(g, None)?.predictions)
    }

    /// Which tensors the optimizer may update.
    pub(crate) fn trainable_mask(&self, freeze_scorer: bool) -> Vec<bool> {
        let n = self.params().len();
        (0..n).map(|i| !(freeze_scorer && i < 2)).collect()
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let settings = BTreeMap::from([
            ("activation".to_string(), self.activation.to_string()),
            ("aggregation".to_string(), self.aggregation().to_string()),
            ("dropout".to_string(), self.dropout.to_string()),
            ("scorer_activation".to_string(), self.scorer.activation.to_string()),
        ]);
        Checkpoint::capture("gnn", settings, self)
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        if ckpt.model != "gnn" {
            return Err(Error::InvalidConfig(format!(
                "checkpoint holds a {} model, not gnn",
                ckpt.model
            )));
        }
        let activation: Activation = parse_setting(ckpt, "activation")?;
        let aggregation: Aggregation = parse_setting(ckpt, "aggregation")?;
        let scorer_activation: Activation = parse_setting(ckpt, "scorer_activation")?;
        let dropout: f64 = ckpt
            .setting("dropout")?
            .parse()
            .map_err(|e| Error::InvalidConfig(format!("dropout: {e}")))?;
        let scorer = EdgeScorer {
            layer: dense_from_records(ckpt.tensor("scorer.weights")?, ckpt.tensor("scorer.bias")?)?,
            activation: scorer_activation,
        };
        let mut layers = Vec::new();
        for l in 0..HIDDEN_LAYERS {
            let own = dense_from_records(
                ckpt.tensor(&format!("sage{l}.self_weights"))?,
                ckpt.tensor(&format!("sage{l}.bias"))?,
            )?;
            let neighbor = dense_from_records(
                ckpt.tensor(&format!("sage{l}.neighbor_weights"))?,
                ckpt.tensor(&format!("sage{l}.bias"))?,
            )?;
            let pool = match aggregation {
                Aggregation::Pool => Some(dense_from_records(
                    ckpt.tensor(&format!("sage{l}.pool.weights"))?,
                    ckpt.tensor(&format!("sage{l}.pool.bias"))?,
                )?),
                _ => None,
            };
            layers.push(SageLayer {
                self_weights: own.weights,
                neighbor_weights: neighbor.weights,
                bias: own.bias,
                aggregation,
                pool,
            });
        }
        let model = Self {
            scorer,
            layers,
            head: dense_from_records(ckpt.tensor("head.weights")?, ckpt.tensor("head.bias")?)?,
            activation,
            dropout,
        };
        let mut check = model.clone();
        ckpt.restore_into(&mut check)?;
        Ok(model)
    }
}

impl Parameters for GnnModel {
    fn params(&self) -> Vec<(String, Vec<usize>, &[f64])> {
        fn dense<'a>(out: &mut Vec<(String, Vec<usize>, &'a [f64])>, name: &str, layer: &'a DenseLayer) {
            let (o, i) = layer.weights.dim();
            out.push((format!("{name}.weights"), vec![o, i], slice2(&layer.weights)));
            out.push((format!("{name}.bias"), vec![o], slice1(&layer.bias)));
        }
        let mut out = Vec::new();
        dense(&mut out, "scorer", &self.scorer.layer);
        for (l, layer) in self.layers.iter().enumerate() {
            let (o, i) = layer.self_weights.dim();
            out.push((format!("sage{l}.self_weights"), vec![o, i], slice2(&layer.self_weights)));
            out.push((
                format!("sage{l}.neighbor_weights"),
                vec![o, i],
                slice2(&layer.neighbor_weights),
            ));
            out.push((format!("sage{l}.bias"), vec![o], slice1(&layer.bias)));
            if let Some(pool) = &layer.pool {
                dense(&mut out, &format!("sage{l}.pool"), pool);
            }
        }
        dense(&mut out, "head", &self.head);
        out
    }

    fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = vec![
            slice2_mut(&mut self.scorer.layer.weights),
            slice1_mut(&mut self.scorer.layer.bias),
        ];
        for layer in &mut self.layers {
            out.push(slice2_mut(&mut layer.self_weights));
            out.push(slice2_mut(&mut layer.neighbor_weights));
            out.push(slice1_mut(&mut layer.bias));
            if let Some(pool) = &mut layer.pool {
                out.push(slice2_mut(&mut pool.weights));
                out.push(slice1_mut(&mut pool.bias));
            }
        }
        out.push(slice2_mut(&mut self.head.weights));
        out.push(slice1_mut(&mut self.head.bias));
        out
    }
}
