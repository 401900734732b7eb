use ndarray::{Array1, Array2, ArrayView2, Axis};

use super::ops::{activate_masked, activation_backward, layer_mask, linear_param_grads, DropoutStream};
use super::params::{slice1, slice1_mut, slice2, slice2_mut};
use super::{masked_mse, Activation, DenseLayer, Hyperparameters, OptimizerState, Parameters, TrainOutcome};
use crate::error::{Error, Result};
use crate::seed::{self, TAG_INIT};

pub(crate) const HIDDEN_LAYERS: usize = 2;

/// Init stream tags. Graph layers reuse the same tags for their self
/// transform, so both models start from identical weights for a given seed.
pub(crate) fn layer_init_seed(model_seed: u64, layer: usize, block: u64) -> u64 {
    seed::derive(model_seed, TAG_INIT, 10 * layer as u64 + block)
}

pub(crate) fn head_init_seed(model_seed: u64) -> u64 {
    seed::derive(model_seed, TAG_INIT, 100)
}

/// Two-hidden-layer perceptron regressor. Embeddings are the output of the
/// second hidden layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub hidden: Vec<DenseLayer>,
    pub head: DenseLayer,
    pub activation: Activation,
    pub dropout: f64,
}

/// Intermediate values of a forward pass, kept for backprop.
#[derive(Debug, Clone)]
pub struct MlpCache {
    /// Input to each hidden layer.
    pub inputs: Vec<Array2<f64>>,
    pub pre: Vec<Array2<f64>>,
    pub masks: Vec<Option<Array2<f64>>>,
    pub embeddings: Array2<f64>,
    pub predictions: Array1<f64>,
}

impl Mlp {
    pub fn new(in_dim: usize, hp: &Hyperparameters, model_seed: u64) -> Self {
        let mut hidden = Vec::with_capacity(HIDDEN_LAYERS);
        let mut fan_in = in_dim;
        for l in 0..HIDDEN_LAYERS {
            hidden.push(DenseLayer::glorot(
                fan_in,
                hp.hidden_dim,
                layer_init_seed(model_seed, l, 0),
            ));
            fan_in = hp.hidden_dim;
        }
        Self {
            hidden,
            head: DenseLayer::glorot(hp.hidden_dim, 1, head_init_seed(model_seed)),
            activation: hp.activation,
            dropout: hp.dropout,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.hidden[0].in_dim()
    }

    /// Same architecture with every parameter zero; used as a gradient holder.
    pub fn zeros_like(&self) -> Self {
        Self {
            hidden: self
                .hidden
                .iter()
                .map(|l| DenseLayer::zeros(l.in_dim(), l.out_dim()))
                .collect(),
            head: DenseLayer::zeros(self.head.in_dim(), 1),
            activation: self.activation,
            dropout: self.dropout,
        }
    }

    /// Forward pass over all rows. `dropout` of `None` means evaluation
    /// mode; otherwise row `r` draws its mask from stream `row_keys[r]`.
    pub fn forward(
        &self,
        x: ArrayView2<'_, f64>,
        row_keys: &[usize],
        dropout: Option<DropoutStream>,
    ) -> Result<MlpCache> {
        if x.ncols() != self.in_dim() {
            return Err(Error::ShapeMismatch(format!(
                "{} input columns for a network with {} inputs",
                x.ncols(),
                self.in_dim()
            )));
        }
        if x.nrows() != row_keys.len() {
            return Err(Error::LengthMismatch {
                left: x.nrows(),
                right: row_keys.len(),
            });
        }
        let mut h = x.to_owned();
        let mut cache = MlpCache {
            inputs: Vec::new(),
            pre: Vec::new(),
            masks: Vec::new(),
            embeddings: Array2::zeros((0, 0)),
            predictions: Array1::zeros(0),
        };
        for (l, layer) in self.hidden.iter().enumerate() {
            let pre = layer.forward_batch(h.view());
            let mask = layer_mask(row_keys, layer.out_dim(), self.dropout, l, dropout);
            let out = activate_masked(self.activation, &pre, mask.as_ref());
            cache.inputs.push(h);
            cache.pre.push(pre);
            cache.masks.push(mask);
            h = out;
        }
        cache.predictions = self.head.forward_batch(h.view()).column(0).to_owned();
        cache.embeddings = h;
        Ok(cache)
    }

    /// Gradient of the loss given `d_pred = ∂loss/∂predictions`.
    pub fn backward(&self, cache: &MlpCache, d_pred: &Array1<f64>) -> Mlp {
        let mut grad = self.zeros_like();
        let d_y = d_pred.clone().insert_axis(Axis(1));
        let (dw, db) = linear_param_grads(cache.embeddings.view(), &d_y);
        grad.head = DenseLayer { weights: dw, bias: db };
        let mut d_h = d_y.dot(&self.head.weights);
        for l in (0..self.hidden.len()).rev() {
            let d_pre = activation_backward(self.activation, &cache.pre[l], cache.masks[l].as_ref(), d_h);
            let (dw, db) = linear_param_grads(cache.inputs[l].view(), &d_pre);
            grad.hidden[l] = DenseLayer { weights: dw, bias: db };
            d_h = d_pre.dot(&self.hidden[l].weights);
        }
        grad
    }

    /// Masked MSE and its parameter gradient for one forward pass.
    pub fn loss_and_grad(
        &self,
        x: ArrayView2<'_, f64>,
        targets: &Array1<f64>,
        train_mask: &[bool],
        row_keys: &[usize],
        dropout: Option<DropoutStream>,
    ) -> Result<(f64, Mlp)> {
        let cache = self.forward(x, row_keys, dropout)?;
        let (loss, d_pred) = masked_mse(cache.predictions.view(), targets.view(), train_mask)?;
        Ok((loss, self.backward(&cache, &d_pred)))
    }

    pub fn embeddings(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        let keys: Vec<usize> = (0..x.nrows()).collect();
        Ok(self.forward(x, &keys, None)?.embeddings)
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        let keys: Vec<usize> = (0..x.nrows()).collect();
        Ok(self.forward(x, &keys, None)?.predictions)
    }
}

impl Parameters for Mlp {
    fn params(&self) -> Vec<(String, Vec<usize>, &[f64])> {
        let mut out = Vec::new();
        for (l, layer) in self.hidden.iter().enumerate() {
            let (o, i) = layer.weights.dim();
            out.push((format!("hidden{l}.weights"), vec![o, i], slice2(&layer.weights)));
            out.push((format!("hidden{l}.bias"), vec![o], slice1(&layer.bias)));
        }
        let (o, i) = self.head.weights.dim();
        out.push(("head.weights".to_string(), vec![o, i], slice2(&self.head.weights)));
        out.push(("head.bias".to_string(), vec![o], slice1(&self.head.bias)));
        out
    }

    fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for layer in &mut self.hidden {
            out.push(slice2_mut(&mut layer.weights));
            out.push(slice1_mut(&mut layer.bias));
        }
        out.push(slice2_mut(&mut self.head.weights));
        out.push(slice1_mut(&mut self.head.bias));
        out
    }
}

/// Generic epoch loop. Each epoch visits `units` in order (one unit per graph
/// for batched training); `unit_step` returns the unit's summed squared error,
/// its number of loss terms, and the gradient of its mean loss, or `None` if the
/// unit has no training rows. One optimizer step is taken per contributing
/// unit. The recorded epoch loss is total squared error over total terms.
pub(crate) fn fit<M, F>(
    mut model: M,
    hp: &Hyperparameters,
    trainable: Option<&[bool]>,
    units: usize,
    mut unit_step: F,
) -> Result<(M, Vec<f64>)>
where
    M: Parameters,
    F: FnMut(&M, usize, usize) -> Result<Option<(f64, usize, M)>>,
{
    let mut opt = OptimizerState::new(hp.optimizer);
    let mut history = Vec::with_capacity(hp.epochs);
    for epoch in 0..hp.epochs {
        let (mut sse, mut terms) = (0.0, 0usize);
        for unit in 0..units {
            let Some((unit_sse, unit_terms, grad)) = unit_step(&model, epoch, unit)? else {
                continue;
            };
            sse += unit_sse;
            terms += unit_terms;
            let grads: Vec<&[f64]> = grad.params().into_iter().map(|p| p.2).collect();
            opt.step(model.params_mut(), grads, hp.learning_rate, hp.l2_weight, trainable)?;
        }
        if terms == 0 {
            return Err(Error::EmptyMask);
        }
        history.push(sse / terms as f64);
    }
    Ok((model, history))
}

/// Trains a fresh perceptron on rows where `train_mask` is set. Rows outside
/// the mask still flow through the forward pass but never reach the loss.
pub fn train_mlp(
    x: ArrayView2<'_, f64>,
    targets: &Array1<f64>,
    train_mask: &[bool],
    row_keys: &[usize],
    hp: &Hyperparameters,
    model_seed: u64,
) -> Result<TrainOutcome<Mlp>> {
    hp.validate_architecture()?;
    let terms = train_mask.iter().filter(|&&m| m).count();
    if terms == 0 {
        return Err(Error::EmptyMask);
    }
    let model = Mlp::new(x.ncols(), hp, model_seed);
    let (model, loss_history) = fit(model, hp, None, 1, |m, epoch, _| {
        let stream = DropoutStream { model_seed, epoch };
        let (loss, grad) = m.loss_and_grad(x, targets, train_mask, row_keys, Some(stream))?;
        Ok(Some((loss * terms as f64, terms, grad)))
    })?;
    let loss_ids = row_keys
        .iter()
        .zip(train_mask)
        .filter(|(_, &m)| m)
        .map(|(&k, _)| k)
        .collect();
    Ok(TrainOutcome {
        model,
        loss_history,
        loss_ids,
    })
}
