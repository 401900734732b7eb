use ndarray::{Array1, Array2, ArrayView1, Zip};

use crate::error::{Error, Result};
use crate::neural::{
    activate_masked, activation_backward, layer_mask, linear_param_grads, Activation, Aggregation, DenseLayer,
    DropoutStream,
};

/// Incident edges per node: `(neighbor, edge index)`.
#[derive(Debug, Clone)]
pub(crate) struct Adjacency {
    pub incident: Vec<Vec<(usize, usize)>>,
}

impl Adjacency {
    pub fn new(n_nodes: usize, edges: &[(usize, usize)]) -> Self {
        let mut incident = vec![Vec::new(); n_nodes];
        for (e, &(i, j)) in edges.iter().enumerate() {
            incident[i].push((j, e));
            incident[j].push((i, e));
        }
        Self { incident }
    }
}

/// Message-passing layer:
/// `act(W_self h_v + W_neigh agg_v + b)` followed by dropout.
#[derive(Debug, Clone, PartialEq)]
pub struct SageLayer {
    /// `out × in`.
    pub self_weights: Array2<f64>,
    /// `out × in`.
    pub neighbor_weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub aggregation: Aggregation,
    /// `in × in` transform applied to neighbor states before max-pooling.
    pub pool: Option<DenseLayer>,
}

#[derive(Debug, Clone)]
pub(crate) struct SageCache {
    input: Array2<f64>,
    agg: Array2<f64>,
    pre: Array2<f64>,
    mask: Option<Array2<f64>>,
    /// Weight normalizer per node (mean: Σw, gcn: 1 + Σw).
    denom: Vec<f64>,
    pool: Option<PoolCache>,
}

#[derive(Debug, Clone)]
struct PoolCache {
    /// `H Pᵀ`, `n × in`.
    z: Array2<f64>,
    /// Winning pre-activation per `(v, k)`.
    best: Array2<f64>,
    /// Winning `(neighbor, edge)` per `(v, k)`, row-major; `None` if isolated.
    arg: Vec<Option<(usize, usize)>>,
}

impl SageLayer {
    pub fn in_dim(&self) -> usize {
        self.self_weights.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.self_weights.nrows()
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            self_weights: Array2::zeros(self.self_weights.raw_dim()),
            neighbor_weights: Array2::zeros(self.neighbor_weights.raw_dim()),
            bias: Array1::zeros(self.bias.len()),
            aggregation: self.aggregation,
            pool: self.pool.as_ref().map(|p| DenseLayer::zeros(p.in_dim(), p.out_dim())),
        }
    }

    fn aggregate_all(
        &self,
        h: &Array2<f64>,
        adj: &Adjacency,
        w: &[f64],
        act: Activation,
    ) -> (Array2<f64>, Vec<f64>, Option<PoolCache>) {
        let (n, d) = h.dim();
        let mut agg = Array2::zeros((n, d));
        let mut denom = vec![0.0; n];
        match self.aggregation {
            Aggregation::Mean | Aggregation::Gcn => {
                let gcn = self.aggregation == Aggregation::Gcn;
                for v in 0..n {
                    let total: f64 = adj.incident[v].iter().map(|&(_, e)| w[e]).sum();
                    let norm = if gcn { 1.0 + total } else { total };
                    denom[v] = norm;
                    if norm == 0.0 {
                        continue;
                    }
                    let mut row = agg.row_mut(v);
                    if gcn {
                        row.assign(&h.row(v));
                    }
                    for &(u, e) in &adj.incident[v] {
                        row.scaled_add(w[e], &h.row(u));
                    }
                    row /= norm;
                }
                (agg, denom, None)
            }
            Aggregation::Pool => {
                let pool = self.pool.as_ref().expect("pool aggregation carries a pool transform");
                let z = h.dot(&pool.weights.t());
                let mut best = Array2::zeros((n, d));
                let mut arg = vec![None; n * d];
                for v in 0..n {
                    for k in 0..d {
                        let mut top: Option<(f64, usize, usize)> = None;
                        for &(u, e) in &adj.incident[v] {
                            let q = w[e] * z[[u, k]] + pool.bias[k];
                            if top.is_none_or(|(b, _, _)| q > b) {
                                top = Some((q, u, e));
                            }
                        }
                        if let Some((q, u, e)) = top {
                            best[[v, k]] = q;
                            agg[[v, k]] = act.apply(q);
                            arg[v * d + k] = Some((u, e));
                        }
                    }
                }
                (agg, denom, Some(PoolCache { z, best, arg }))
            }
        }
    }

    pub(crate) fn forward(
        &self,
        h: Array2<f64>,
        adj: &Adjacency,
        w: &[f64],
        act: Activation,
        dropout: (f64, &[usize], usize, Option<DropoutStream>),
    ) -> (Array2<f64>, SageCache) {
        let (rate, row_keys, layer, stream) = dropout;
        let (agg, denom, pool) = self.aggregate_all(&h, adj, w, act);
        let pre = h.dot(&self.self_weights.t()) + agg.dot(&self.neighbor_weights.t()) + &self.bias;
        let mask = layer_mask(row_keys, self.out_dim(), rate, layer, stream);
        let out = activate_masked(act, &pre, mask.as_ref());
        (
            out,
            SageCache {
                input: h,
                agg,
                pre,
                mask,
                denom,
                pool,
            },
        )
    }

    /// Returns the parameter gradient and `∂loss/∂h`; adds `∂loss/∂w_e` into
    /// `d_w`.
    pub(crate) fn backward(
        &self,
        cache: &SageCache,
        adj: &Adjacency,
        w: &[f64],
        act: Activation,
        d_out: Array2<f64>,
        d_w: &mut [f64],
    ) -> (SageLayer, Array2<f64>) {
        let d_pre = activation_backward(act, &cache.pre, cache.mask.as_ref(), d_out);
        let (d_self, d_bias) = linear_param_grads(cache.input.view(), &d_pre);
        let d_neighbor = d_pre.t().dot(&cache.agg);
        let mut d_h = d_pre.dot(&self.self_weights);
        let d_agg = d_pre.dot(&self.neighbor_weights);
        let h = &cache.input;
        let mut d_pool = None;
        match self.aggregation {
            Aggregation::Mean | Aggregation::Gcn => {
                for v in 0..h.nrows() {
                    let norm = cache.denom[v];
                    if norm == 0.0 {
                        continue;
                    }
                    let g = d_agg.row(v);
                    if self.aggregation == Aggregation::Gcn {
                        d_h.row_mut(v).scaled_add(1.0 / norm, &g);
                    }
                    let agg_v = cache.agg.row(v);
                    for &(u, e) in &adj.incident[v] {
                        d_h.row_mut(u).scaled_add(w[e] / norm, &g);
                        let mut dot = 0.0;
                        Zip::from(&g)
                            .and(&h.row(u))
                            .and(&agg_v)
                            .for_each(|&gk, &hk, &ak| dot += gk * (hk - ak));
                        d_w[e] += dot / norm;
                    }
                }
            }
            Aggregation::Pool => {
                let pool = self.pool.as_ref().expect("pool aggregation carries a pool transform");
                let pc = cache.pool.as_ref().expect("pool cache present for pool aggregation");
                let (n, d) = h.dim();
                let mut d_z = Array2::zeros((n, d));
                let mut d_pb = Array1::zeros(d);
                for v in 0..n {
                    for k in 0..d {
                        let Some((u, e)) = pc.arg[v * d + k] else { continue };
                        let g = d_agg[[v, k]] * act.derivative(pc.best[[v, k]]);
                        d_z[[u, k]] += g * w[e];
                        d_pb[k] += g;
                        d_w[e] += g * pc.z[[u, k]];
                    }
                }
                d_h += &d_z.dot(&pool.weights);
                d_pool = Some(DenseLayer {
                    weights: d_z.t().dot(h),
                    bias: d_pb,
                });
            }
        }
        (
            SageLayer {
                self_weights: d_self,
                neighbor_weights: d_neighbor,
                bias: d_bias,
                aggregation: self.aggregation,
                pool: d_pool,
            },
            d_h,
        )
    }
}

/// Aggregate for a single node from its neighbors' states and edge weights.
///
/// `mean`: `Σ w_u h_u / Σ w_u`. `gcn`: the same over neighbors plus the node
/// itself with weight 1. `pool`: elementwise max of `act(P (w_u h_u) + b)`.
/// A node without neighbors aggregates to zero (`gcn` to its own state).
pub fn aggregate(
    kind: Aggregation,
    own_state: ArrayView1<'_, f64>,
    neighbor_states: &[ArrayView1<'_, f64>],
    weights: &[f64],
    pool: Option<(&DenseLayer, Activation)>,
) -> Result<Array1<f64>> {
    if neighbor_states.len() != weights.len() {
        return Err(Error::LengthMismatch {
            left: neighbor_states.len(),
            right: weights.len(),
        });
    }
    let d = own_state.len();
    match kind {
        Aggregation::Mean | Aggregation::Gcn => {
            let (mut acc, mut total) = if kind == Aggregation::Gcn {
                (own_state.to_owned(), 1.0)
            } else {
                (Array1::zeros(d), 0.0)
            };
            for (h, &w) in neighbor_states.iter().zip(weights) {
                acc.scaled_add(w, h);
                total += w;
            }
            Ok(if total == 0.0 { acc } else { acc / total })
        }
        Aggregation::Pool => {
            let (layer, act) =
                pool.ok_or_else(|| Error::ShapeMismatch("pool aggregation needs a pool transform".into()))?;
            let mut out: Option<Array1<f64>> = None;
            for (h, &w) in neighbor_states.iter().zip(weights) {
                let msg = act.activate(layer.forward((h * w).view())?.view());
                out = Some(match out {
                    None => msg,
                    Some(m) => Zip::from(&m).and(&msg).map_collect(|&a, &b| a.max(b)),
                });
            }
            Ok(out.unwrap_or_else(|| Array1::zeros(layer.out_dim())))
        }
    }
}
