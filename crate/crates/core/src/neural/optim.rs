use crate::error::{Error, Result};

use super::OptimizerKind;

/// Optimizer state: Adam moment accumulators per parameter tensor, or
/// nothing for plain SGD.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub kind: OptimizerKind,
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl OptimizerState {
    pub fn new(kind: OptimizerKind) -> Self {
        Self {
            kind,
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            first: Vec::new(),
            second: Vec::new(),
        }
    }

    /// One update. L2 adds `l2_weight * p` to each gradient first. Tensors with
    /// `trainable[i] == false` are left untouched (their moments stay zero).
    pub fn step(
        &mut self,
        params: Vec<&mut [f64]>,
        grads: Vec<&[f64]>,
        lr: f64,
        l2_weight: f64,
        trainable: Option<&[bool]>,
    ) -> Result<()> {
        if params.len() != grads.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} parameter tensors but {} gradients",
                params.len(),
                grads.len()
            )));
        }
        for (i, (p, g)) in params.iter().zip(&grads).enumerate() {
            if p.len() != g.len() {
                return Err(Error::ShapeMismatch(format!(
                    "tensor {i}: {} parameters, {} gradients",
                    p.len(),
                    g.len()
                )));
            }
        }
        if self.kind == OptimizerKind::Adam && self.first.is_empty() {
            self.first = params.iter().map(|p| vec![0.0; p.len()]).collect();
            self.second = self.first.clone();
        }
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for (i, (p, g)) in params.into_iter().zip(grads).enumerate() {
            if trainable.is_some_and(|mask| !mask[i]) {
                continue;
            }
            match self.kind {
                OptimizerKind::Sgd => {
                    for (pv, &gv) in p.iter_mut().zip(g) {
                        let grad = gv + l2_weight * *pv;
                        *pv -= lr * grad;
                    }
                }
                OptimizerKind::Adam => {
                    let (m, v) = (&mut self.first[i], &mut self.second[i]);
                    for k in 0..p.len() {
                        let grad = g[k] + l2_weight * p[k];
                        m[k] = self.beta1 * m[k] + (1.0 - self.beta1) * grad;
                        v[k] = self.beta2 * v[k] + (1.0 - self.beta2) * grad * grad;
                        let m_hat = m[k] / bc1;
                        let v_hat = v[k] / bc2;
                        p[k] -= lr * m_hat / (v_hat.sqrt() + self.epsilon);
                    }
                }
            }
        }
        Ok(())
    }
}
