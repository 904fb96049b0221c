//! Deterministic inputs for the benchmarks.

use furnace_core::ad::Tensor;

/// Smooth pseudo-data in `[-1, 1]`; no RNG so runs are comparable.
pub fn wave(n: usize, phase: f64) -> Vec<f64> {
    (0..n).map(|i| (0.37 * i as f64 + phase).sin()).collect()
}

/// `steps` inputs of shape `[batch, features]`.
pub fn sequence(steps: usize, batch: usize, features: usize) -> Vec<Tensor> {
    (0..steps)
        .map(|t| Tensor::new(vec![batch, features], wave(batch * features, t as f64)).unwrap())
        .collect()
}

/// `n_features` columns of `n` rows and a target mixing the first two.
pub fn regression(n: usize, n_features: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let cols: Vec<Vec<f64>> = (0..n_features).map(|j| wave(n, 1.3 * j as f64)).collect();
    let y = (0..n).map(|i| 2.0 * cols[0][i] - cols[1][i] * cols[1][i]).collect();
    (cols, y)
}
