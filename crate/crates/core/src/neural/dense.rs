use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;

use super::params::{slice1, slice1_mut, slice2, slice2_mut};
use super::Parameters;
use crate::error::{Error, Result};
use crate::seed;

/// Fully connected layer `y = W x + b` with `W` of shape `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl DenseLayer {
    pub fn new(weights: Array2<f64>, bias: Array1<f64>) -> Result<Self> {
        if weights.nrows() != bias.len() {
            return Err(Error::ShapeMismatch(format!(
                "weights {:?} vs bias {}",
                weights.dim(),
                bias.len()
            )));
        }
        if weights.iter().chain(bias.iter()).any(|v| !v.is_finite()) {
            return Err(Error::ShapeMismatch("non-finite parameter".into()));
        }
        Ok(Self { weights, bias })
    }

    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            weights: Array2::zeros((out_dim, in_dim)),
            bias: Array1::zeros(out_dim),
        }
    }

    /// Glorot-uniform weights in `±sqrt(6 / (in + out))`, zero bias.
    pub fn glorot(in_dim: usize, out_dim: usize, stream_seed: u64) -> Self {
        Self {
            weights: glorot_matrix(in_dim, out_dim, stream_seed),
            bias: Array1::zeros(out_dim),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn forward(&self, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        if x.len() != self.in_dim() {
            return Err(Error::ShapeMismatch(format!(
                "input of length {} for layer with {} inputs",
                x.len(),
                self.in_dim()
            )));
        }
        Ok(self.weights.dot(&x) + &self.bias)
    }

    /// Row-wise forward: `X Wᵀ + b` for `X` of shape `n × in`.
    pub fn forward_batch(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        x.dot(&self.weights.t()) + &self.bias
    }
}

impl Parameters for DenseLayer {
    fn params(&self) -> Vec<(String, Vec<usize>, &[f64])> {
        let (o, i) = self.weights.dim();
        vec![
            ("weights".to_string(), vec![o, i], slice2(&self.weights)),
            ("bias".to_string(), vec![o], slice1(&self.bias)),
        ]
    }

    fn params_mut(&mut self) -> Vec<&mut [f64]> {
        vec![slice2_mut(&mut self.weights), slice1_mut(&mut self.bias)]
    }
}

/// `out × in` Glorot-uniform matrix drawn from its own seed stream.
pub(crate) fn glorot_matrix(in_dim: usize, out_dim: usize, stream_seed: u64) -> Array2<f64> {
    let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
    let mut rng = seed::rng(stream_seed);
    Array2::from_shape_simple_fn((out_dim, in_dim), || rng.random_range(-limit..limit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn forward_examples() {
        let id = DenseLayer::new(Array2::eye(3), Array1::zeros(3)).unwrap();
        assert_eq!(
            id.forward(array![1.0, -2.0, 3.0].view()).unwrap(),
            array![1.0, -2.0, 3.0]
        );
        let sum = DenseLayer::new(array![[1.0, 1.0]], array![0.0]).unwrap();
        assert_eq!(sum.forward(array![2.0, 3.0].view()).unwrap(), array![5.0]);
        let bias = DenseLayer::new(array![[0.0, 0.0]], array![7.0]).unwrap();
        assert_eq!(bias.forward(array![2.0, 3.0].view()).unwrap(), array![7.0]);
        assert!(matches!(sum.forward(array![1.0].view()), Err(Error::ShapeMismatch(_))));
        assert!(DenseLayer::new(array![[1.0]], array![0.0, 1.0]).is_err());
    }

    #[test]
    fn batch_matches_rowwise() {
        let l = DenseLayer::glorot(3, 4, 9);
        let x = array![[1.0, 2.0, 3.0], [-1.0, 0.5, 0.0]];
        let b = l.forward_batch(x.view());
        for i in 0..2 {
            let r = l.forward(x.row(i)).unwrap();
            for k in 0..4 {
                assert!((b[[i, k]] - r[k]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn glorot_bounds_and_determinism() {
        let a = DenseLayer::glorot(10, 20, 1);
        let limit = (6.0f64 / 30.0).sqrt();
        assert!(a.weights.iter().all(|w| w.abs() < limit));
        assert_eq!(a, DenseLayer::glorot(10, 20, 1));
        assert_ne!(a, DenseLayer::glorot(10, 20, 2));
        assert!(a.bias.iter().all(|&b| b == 0.0));
    }
}
