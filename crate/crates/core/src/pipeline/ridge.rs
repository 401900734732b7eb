use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Ridge penalty relative to the mean diagonal of the centered normal matrix.
pub const RIDGE_SCALE: f64 = 1e-6;

/// Fitted linear model `y ≈ intercept + x · coef`.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeFit {
    pub intercept: f64,
    pub coef: Array1<f64>,
    pub lambda: f64,
}

impl RidgeFit {
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Array1<f64> {
        x.dot(&self.coef) + self.intercept
    }
}

/// Closed-form ridge regression on centered data with an unpenalized
/// intercept. `λ = lambda_scale · trace(XcᵀXc) / d`; an all-constant design
/// (zero trace) yields zero coefficients and the mean as intercept.
pub fn fit_ridge(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, lambda_scale: f64) -> Result<RidgeFit> {
    if x.nrows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.nrows(),
            right: y.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::EmptyVector);
    }
    let d = x.ncols();
    let x_mean = x.mean_axis(Axis(0)).expect("non-empty design");
    let y_mean = y.mean().expect("non-empty targets");
    let xc = &x - &x_mean;
    let yc = &y - y_mean;
    let mut gram = xc.t().dot(&xc);
    let trace: f64 = gram.diag().sum();
    if d == 0 || trace == 0.0 {
        return Ok(RidgeFit {
            intercept: y_mean,
            coef: Array1::zeros(d),
            lambda: 0.0,
        });
    }
    let lambda = lambda_scale * trace / d as f64;
    for i in 0..d {
        gram[[i, i]] += lambda;
    }
    let rhs = xc.t().dot(&yc);
    let coef = cholesky_solve(gram, rhs)?;
    let intercept = y_mean - x_mean.dot(&coef);
    Ok(RidgeFit {
        intercept,
        coef,
        lambda,
    })
}

/// Solves `A x = b` for symmetric positive-definite `A` by Cholesky factorization.
fn cholesky_solve(a: Array2<f64>, b: Array1<f64>) -> Result<Array1<f64>> {
    let n = a.nrows();
    let a = DMatrix::from_fn(n, n, |i, j| a[[i, j]]);
    let chol = a.cholesky().ok_or(Error::DegenerateDesign)?;
    let x = chol.solve(&DVector::from_vec(b.to_vec()));
    if x.iter().all(|v| v.is_finite()) {
        Ok(Array1::from_vec(x.as_slice().to_vec()))
    } else {
        Err(Error::DegenerateDesign)
    }
}

/// Fits ridge on `train_idx` rows of `embeddings` and returns test-row MSE.
pub fn embed_and_regress(
    embeddings: ArrayView2<'_, f64>,
    targets: ArrayView1<'_, f64>,
    train_idx: &[usize],
    test_idx: &[usize],
) -> Result<f64> {
    let n = embeddings.nrows();
    if targets.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: targets.len(),
        });
    }
    if train_idx.is_empty() || test_idx.is_empty() {
        return Err(Error::EmptyMask);
    }
    let mut seen = vec![false; n];
    for &i in train_idx {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, len: n });
        }
        seen[i] = true;
    }
    for &i in test_idx {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, len: n });
        }
        if seen[i] {
            return Err(Error::InvalidConfig(format!(
                "sample {i} is in both train and test sets"
            )));
        }
    }
    let x_train = embeddings.select(Axis(0), train_idx);
    let y_train = targets.select(Axis(0), train_idx);
    let fit = fit_ridge(x_train.view(), y_train.view(), RIDGE_SCALE)?;
    let pred = fit.predict(embeddings.select(Axis(0), test_idx).view());
    let sse: f64 = test_idx.iter().zip(&pred).map(|(&i, p)| (p - targets[i]).powi(2)).sum();
    Ok(sse / test_idx.len() as f64)
}
