use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::neural::{Activation, DenseLayer};

/// Refines edge weights from endpoint features:
/// `w_ij = exp(s · act(concat(x_i, x_j)) + b) · w_init`.
///
/// The activated concatenation is averaged over both endpoint orders, so the
/// score is symmetric and does not depend on how nodes are numbered. With
/// all-zero parameters every refined weight equals its initial weight.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeScorer {
    /// `1 × 2F` score layer.
    pub layer: DenseLayer,
    pub activation: Activation,
}

#[derive(Debug, Clone)]
pub(crate) struct ScorerCache {
    /// `(act(concat(x_i, x_j)) + act(concat(x_j, x_i))) / 2` per edge, `E × 2F`.
    pub edge_features: Array2<f64>,
    pub weights: Vec<f64>,
}

impl EdgeScorer {
    pub fn zeros(n_features: usize, activation: Activation) -> Self {
        Self {
            layer: DenseLayer::zeros(2 * n_features, 1),
            activation,
        }
    }

    pub fn n_features(&self) -> usize {
        self.layer.in_dim() / 2
    }

    pub(crate) fn forward(
        &self,
        x: ArrayView2<'_, f64>,
        edges: &[(usize, usize)],
        initial: &[f64],
    ) -> Result<ScorerCache> {
        let f = x.ncols();
        if 2 * f != self.layer.in_dim() {
            return Err(Error::ShapeMismatch(format!(
                "scorer expects {} features per endpoint, graph has {f}",
                self.n_features()
            )));
        }
        let act = self.activation;
        let mut edge_features = Array2::zeros((edges.len(), 2 * f));
        for (e, &(i, j)) in edges.iter().enumerate() {
            let (xi, xj) = (x.row(i), x.row(j));
            for k in 0..f {
                let (a, b) = (act.apply(xi[k]), act.apply(xj[k]));
                let mean = 0.5 * (a + b);
                edge_features[[e, k]] = mean;
                edge_features[[e, f + k]] = mean;
            }
        }
        let raw = self.layer.forward_batch(edge_features.view());
        let weights = raw.column(0).iter().zip(initial).map(|(r, w0)| r.exp() * w0).collect();
        Ok(ScorerCache { edge_features, weights })
    }

    /// Refined weight of every edge of the graph described by `x`/`edges`.
    pub fn edge_weights(&self, x: ArrayView2<'_, f64>, edges: &[(usize, usize)], initial: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(x, edges, initial)?.weights)
    }

    /// Parameter gradient from `∂loss/∂w_e`.
    pub(crate) fn backward(&self, cache: &ScorerCache, d_weights: &[f64]) -> DenseLayer {
        // w = exp(raw)·w0, so ∂w/∂raw = w.
        let d_raw: Array1<f64> = d_weights.iter().zip(&cache.weights).map(|(d, w)| d * w).collect();
        let d_raw = d_raw.insert_axis(Axis(1));
        DenseLayer {
            weights: d_raw.t().dot(&cache.edge_features),
            bias: d_raw.sum_axis(Axis(0)),
        }
    }
}
