use ndarray::{Array1, ArrayView1};

use crate::error::{Error, Result};

/// Mean squared error and its gradient `2 (pred - truth) / len`.
pub fn mse_loss(pred: ArrayView1<'_, f64>, truth: ArrayView1<'_, f64>) -> Result<(f64, Array1<f64>)> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptyVector);
    }
    let n = pred.len() as f64;
    let diff = &pred - &truth;
    let loss = diff.iter().map(|d| d * d).sum::<f64>() / n;
    Ok((loss, diff * (2.0 / n)))
}

/// MSE restricted to entries where `mask` is true. The gradient is zero
/// elsewhere; masked-out targets are never read.
pub fn masked_mse(pred: ArrayView1<'_, f64>, truth: ArrayView1<'_, f64>, mask: &[bool]) -> Result<(f64, Array1<f64>)> {
    if pred.len() != truth.len() || pred.len() != mask.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len().min(mask.len()),
        });
    }
    let count = mask.iter().filter(|&&m| m).count();
    if count == 0 {
        return Err(Error::EmptyMask);
    }
    let n = count as f64;
    let mut grad = Array1::zeros(pred.len());
    let mut loss = 0.0;
    for i in 0..pred.len() {
        if mask[i] {
            let d = pred[i] - truth[i];
            loss += d * d;
            grad[i] = 2.0 * d / n;
        }
    }
    Ok((loss / n, grad))
}
