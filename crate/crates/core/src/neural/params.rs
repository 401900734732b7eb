/// Named access to a model's trainable tensors in a fixed order.
///
/// A model's gradient has the same type as the model, so the two sides of an
/// optimizer step line up tensor by tensor.
pub trait Parameters {
    /// `(name, shape, values)` per tensor.
    fn params(&self) -> Vec<(String, Vec<usize>, &[f64])>;
    fn params_mut(&mut self) -> Vec<&mut [f64]>;

    fn n_params(&self) -> usize {
        self.params().iter().map(|p| p.2.len()).sum()
    }
}

pub fn flatten<M: Parameters>(m: &M) -> Vec<f64> {
    m.params().into_iter().flat_map(|(_, _, v)| v.iter().copied()).collect()
}

/// Inverse of [`flatten`].
pub fn unflatten<M: Parameters>(m: &mut M, values: &[f64]) {
    let mut pos = 0;
    for p in m.params_mut() {
        let n = p.len();
        p.copy_from_slice(&values[pos..pos + n]);
        pos += n;
    }
    assert_eq!(pos, values.len(), "flat parameter vector length mismatch");
}

pub(crate) fn slice2(a: &ndarray::Array2<f64>) -> &[f64] {
    a.as_slice().expect("parameters are stored in standard layout")
}

pub(crate) fn slice2_mut(a: &mut ndarray::Array2<f64>) -> &mut [f64] {
    a.as_slice_mut().expect("parameters are stored in standard layout")
}

pub(crate) fn slice1(a: &ndarray::Array1<f64>) -> &[f64] {
    a.as_slice().expect("parameters are stored in standard layout")
}

pub(crate) fn slice1_mut(a: &mut ndarray::Array1<f64>) -> &mut [f64] {
    a.as_slice_mut().expect("parameters are stored in standard layout")
}
