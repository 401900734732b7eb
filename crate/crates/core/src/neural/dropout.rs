use ndarray::Array2;

use crate::seed::{mix64, unit_f64};

/// Inverted-dropout mask of shape `rows × cols`: each unit is kept with
/// probability `1 - rate` and scaled by `1 / (1 - rate)`. Outside training the
/// mask is all ones. Rows are keyed by their index.
pub fn dropout_mask(shape: (usize, usize), rate: f64, seed: u64, training: bool) -> Array2<f64> {
    let keys: Vec<usize> = (0..shape.0).collect();
    dropout_mask_keyed(&keys, shape.1, rate, seed, training)
}

/// Like [`dropout_mask`] but row `r` draws from stream `row_keys[r]`, so a
/// sample gets the same mask no matter which other rows share the batch.
pub fn dropout_mask_keyed(row_keys: &[usize], cols: usize, rate: f64, seed: u64, training: bool) -> Array2<f64> {
    assert!((0.0..1.0).contains(&rate), "dropout rate {rate} outside [0, 1)");
    if !training || rate == 0.0 {
        return Array2::ones((row_keys.len(), cols));
    }
    let keep = 1.0 - rate;
    let scale = 1.0 / keep;
    let mut mask = Array2::zeros((row_keys.len(), cols));
    for (r, &key) in row_keys.iter().enumerate() {
        let row_seed = mix64(seed ^ mix64(key as u64));
        for c in 0..cols {
            if unit_f64(mix64(row_seed.wrapping_add(c as u64))) < keep {
                mask[[r, c]] = scale;
            }
        }
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rate_and_eval_are_identity() {
        assert!(dropout_mask((5, 7), 0.0, 1, true).iter().all(|&v| v == 1.0));
        assert!(dropout_mask((5, 7), 0.9, 1, false).iter().all(|&v| v == 1.0));
    }

    #[test]
    fn half_rate_keeps_about_half() {
        let m = dropout_mask((100, 100), 0.5, 42, true);
        let kept = m.iter().filter(|&&v| v > 0.0).count() as f64 / 1e4;
        // binomial sd = 0.005, tolerance is four sigma
        assert!((kept - 0.5).abs() < 0.02, "{kept}");
        assert!(m.iter().all(|&v| v == 0.0 || v == 2.0));
    }

    #[test]
    fn deterministic_and_keyed() {
        assert_eq!(dropout_mask((4, 9), 0.3, 5, true), dropout_mask((4, 9), 0.3, 5, true));
        assert_ne!(dropout_mask((4, 9), 0.3, 5, true), dropout_mask((4, 9), 0.3, 6, true));
        let all = dropout_mask_keyed(&[3, 8, 11], 16, 0.4, 9, true);
        let one = dropout_mask_keyed(&[8], 16, 0.4, 9, true);
        assert_eq!(all.row(1), one.row(0));
    }
}
