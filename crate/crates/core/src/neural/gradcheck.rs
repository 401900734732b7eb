/// Central-difference step for 64-bit parameters.
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    /// `max_k |a_k - f_k| / max(1, |a_k|, |f_k|)`.
    pub max_rel_error: f64,
    pub worst_index: usize,
    pub n_params: usize,
}

impl GradCheckReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_error < tol
    }
}

/// Compares `analytic` against central differences of `loss` around `theta`.
pub fn gradient_check(mut loss: impl FnMut(&[f64]) -> f64, theta: &[f64], analytic: &[f64]) -> GradCheckReport {
    assert_eq!(theta.len(), analytic.len(), "gradient length must match parameters");
    let mut probe = theta.to_vec();
    let mut worst = (0.0, 0);
    for k in 0..theta.len() {
        probe[k] = theta[k] + FD_STEP;
        let up = loss(&probe);
        probe[k] = theta[k] - FD_STEP;
        let down = loss(&probe);
        probe[k] = theta[k];
        let fd = (up - down) / (2.0 * FD_STEP);
        let a = analytic[k];
        let rel = (a - fd).abs() / 1f64.max(a.abs()).max(fd.abs());
        if rel > worst.0 || rel.is_nan() {
            worst = (rel, k);
        }
    }
    GradCheckReport {
        max_rel_error: worst.0,
        worst_index: worst.1,
        n_params: theta.len(),
    }
}
