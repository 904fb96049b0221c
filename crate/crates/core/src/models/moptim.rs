use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ad::{Graph, Tensor, Var};
use crate::error::{Error, Result};
use crate::preprocess::OUTPUT_STEPS;

/// Linear policy model: flattened `[rows × F]` stack to 5 PCI values.
#[derive(Clone, Debug, PartialEq)]
pub struct MOptim {
    pub w: Tensor,
    pub b: Tensor,
}

impl MOptim {
    /// Weights uniform(−k, k), k = 1/√fan_in; biases at `bias`.
    pub fn new(fan_in: usize, bias: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = 1.0 / (fan_in as f64).sqrt();
        let w = (0..fan_in * OUTPUT_STEPS).map(|_| rng.random_range(-k..k)).collect();
        Self {
            w: Tensor::new(vec![fan_in, OUTPUT_STEPS], w).expect("shape"),
            b: Tensor::full(&[1, OUTPUT_STEPS], bias),
        }
    }

    pub fn fan_in(&self) -> usize {
        self.w.rows()
    }

    /// `x [1 × fan_in] · w + b`.
    pub fn forward(g: &mut Graph, w: Var, b: Var, x: Var) -> Result<Var> {
        let (_, n) = g.value(x).dims2()?;
        if n != g.value(w).rows() {
            return Err(Error::shape(
                "moptim",
                format!("stack of {n} values, expected {}", g.value(w).rows()),
            ));
        }
        let y = g.matmul(x, w)?;
        g.add_bias(y, b)
    }
}
