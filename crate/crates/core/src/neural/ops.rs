//! Batched forward/backward pieces shared by the perceptron and the graph
//! layers. Both models route through these so that a graph layer without
//! neighbors performs exactly the same floating-point operations as a dense
//! layer.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use super::{dropout_mask_keyed, Activation};
use crate::seed::{self, TAG_DROPOUT};

/// Identifies the dropout masks of one training epoch. Each layer derives its
/// own stream from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DropoutStream {
    pub model_seed: u64,
    pub epoch: usize,
}

impl DropoutStream {
    pub fn layer_seed(self, layer: usize) -> u64 {
        seed::derive(
            seed::derive(self.model_seed, TAG_DROPOUT, self.epoch as u64),
            TAG_DROPOUT,
            layer as u64,
        )
    }
}

/// Dropout mask for `row_keys.len()` rows, or `None` when dropout is inactive.
pub(crate) fn layer_mask(
    row_keys: &[usize],
    cols: usize,
    rate: f64,
    layer: usize,
    stream: Option<DropoutStream>,
) -> Option<Array2<f64>> {
    match stream {
        Some(s) if rate > 0.0 => Some(dropout_mask_keyed(row_keys, cols, rate, s.layer_seed(layer), true)),
        _ => None,
    }
}

/// `act(pre) ∘ mask`.
pub(crate) fn activate_masked(act: Activation, pre: &Array2<f64>, mask: Option<&Array2<f64>>) -> Array2<f64> {
    let out = act.activate2(pre);
    match mask {
        Some(m) => out * m,
        None => out,
    }
}

/// Gradient wrt the pre-activation given the gradient wrt the masked output.
pub(crate) fn activation_backward(
    act: Activation,
    pre: &Array2<f64>,
    mask: Option<&Array2<f64>>,
    d_out: Array2<f64>,
) -> Array2<f64> {
    let d = match mask {
        Some(m) => d_out * m,
        None => d_out,
    };
    let mut d = d;
    d.zip_mut_with(pre, |g, &p| *g *= act.derivative(p));
    d
}

/// Gradients of `Y = X Wᵀ + b`: returns `(dW, db)`.
pub(crate) fn linear_param_grads(x: ArrayView2<'_, f64>, d_y: &Array2<f64>) -> (Array2<f64>, Array1<f64>) {
    (d_y.t().dot(&x), d_y.sum_axis(Axis(0)))
}
