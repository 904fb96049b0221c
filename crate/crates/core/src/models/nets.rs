use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lstm::{lstm_forward, lstm_param_count, time_major, LstmVars};
use crate::ad::{Graph, Tensor, Var};
use crate::error::{Error, Result};
use crate::preprocess::{INPUT_STEPS, OUTPUT_STEPS};
use crate::qsim::QdiCircuit;

pub const DEFAULT_HIDDEN_MT: usize = 143;
pub const DEFAULT_HIDDEN_MALL: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    /// Temperature forecaster with a single dense head.
    MtClassical,
    /// Temperature forecaster with a dense → QDI → dense head.
    MtHybrid,
    /// Forecaster of every feature.
    MAll,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::MtClassical => "mt-classical",
            Self::MtHybrid => "mt-hybrid",
            Self::MAll => "mall",
        }
    }

    pub fn default_hidden(self) -> usize {
        match self {
            Self::MAll => DEFAULT_HIDDEN_MALL,
            _ => DEFAULT_HIDDEN_MT,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mt-classical" => Ok(Self::MtClassical),
            "mt-hybrid" => Ok(Self::MtHybrid),
            "mall" => Ok(Self::MAll),
            other => Err(Error::Config(format!(
                "unknown model {other:?}; expected mt-classical, mt-hybrid or mall"
            ))),
        }
    }
}

/// An LSTM encoder over 24 steps plus a kind-specific head.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub kind: ModelKind,
    pub n_features: usize,
    pub hidden: usize,
    pub circuit: QdiCircuit,
    pub params: Vec<Tensor>,
}

fn uniform(rng: &mut ChaCha8Rng, shape: &[usize], k: f64) -> Tensor {
    let n: usize = shape.iter().product();
    let data = (0..n).map(|_| rng.random_range(-k..k)).collect();
    Tensor::new(shape.to_vec(), data).expect("shape product matches")
}

impl Model {
    /// Parameter names and shapes in storage order.
    pub fn layout(kind: ModelKind, n_features: usize, hidden: usize, circuit: &QdiCircuit) -> Vec<(&'static str, Vec<usize>)> {
        let mut l = vec![
            ("lstm.w_x", vec![n_features, 4 * hidden]),
            ("lstm.w_h", vec![hidden, 4 * hidden]),
            ("lstm.b", vec![1, 4 * hidden]),
        ];
        match kind {
            ModelKind::MtClassical => {
                l.push(("head.w", vec![hidden, OUTPUT_STEPS]));
                l.push(("head.b", vec![1, OUTPUT_STEPS]));
            }
            ModelKind::MtHybrid => {
                let slots = circuit.slots();
                l.push(("dense1.w", vec![hidden, slots]));
                l.push(("dense1.b", vec![1, slots]));
                l.push(("qdi.angles", vec![1, slots]));
                l.push(("dense2.w", vec![circuit.n_qubits, OUTPUT_STEPS]));
                l.push(("dense2.b", vec![1, OUTPUT_STEPS]));
            }
            ModelKind::MAll => {
                l.push(("head.w", vec![hidden, OUTPUT_STEPS * n_features]));
                l.push(("head.b", vec![1, OUTPUT_STEPS * n_features]));
            }
        }
        l
    }

    /// Fresh parameters: uniform(−1/√H, 1/√H) for the LSTM, uniform with
    /// k = 1/√fan_in for dense layers, uniform(−0.1, 0.1) for QDI angles.
    pub fn new(kind: ModelKind, n_features: usize, hidden: usize, seed: u64) -> Result<Self> {
        if n_features == 0 || hidden == 0 {
            return Err(Error::Config("model sizes must be positive".into()));
        }
        let circuit = QdiCircuit::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k_lstm = 1.0 / (hidden as f64).sqrt();
        let params = Self::layout(kind, n_features, hidden, &circuit)
            .into_iter()
            .map(|(name, shape)| {
                let k = if name.starts_with("lstm.") {
                    k_lstm
                } else if name == "qdi.angles" {
                    0.1
                } else {
                    let fan_in = match name {
                        "dense2.w" | "dense2.b" => circuit.n_qubits,
                        _ => hidden,
                    };
                    1.0 / (fan_in as f64).sqrt()
                };
                uniform(&mut rng, &shape, k)
            })
            .collect();
        Ok(Self {
            kind,
            n_features,
            hidden,
            circuit,
            params,
        })
    }

    pub fn param_names(&self) -> Vec<&'static str> {
        Self::layout(self.kind, self.n_features, self.hidden, &self.circuit)
            .into_iter()
            .map(|(n, _)| n)
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(Tensor::numel).sum()
    }

    /// Trainable parameters after the LSTM encoder.
    pub fn head_param_count(&self) -> usize {
        self.param_count() - lstm_param_count(self.n_features, self.hidden)
    }

    /// Values per sample: 5 temperatures, or 5 × F for [`ModelKind::MAll`]
    /// (step-major).
    pub fn output_width(&self) -> usize {
        match self.kind {
            ModelKind::MAll => OUTPUT_STEPS * self.n_features,
            _ => OUTPUT_STEPS,
        }
    }

    /// Registers parameters as trainable leaves.
    pub fn bind(&self, g: &mut Graph) -> Vec<Var> {
        self.params.iter().map(|p| g.param(p.clone())).collect()
    }

    /// Registers parameters as constants (inference, or gradients with
    /// respect to inputs only).
    pub fn bind_frozen(&self, g: &mut Graph) -> Vec<Var> {
        self.params.iter().map(|p| g.constant(p.clone())).collect()
    }

    /// `[B × output_width]` from per-step `[B × F]` inputs.
    pub fn forward(&self, g: &mut Graph, params: &[Var], xs: &[Var]) -> Result<Var> {
        if params.len() != self.params.len() {
            return Err(Error::shape("model", "parameter handle count mismatch"));
        }
        let lstm = LstmVars {
            w_x: params[0],
            w_h: params[1],
            b: params[2],
        };
        let h = lstm_forward(g, lstm, xs)?;
        match self.kind {
            ModelKind::MtClassical | ModelKind::MAll => {
                let y = g.matmul(h, params[3])?;
                g.add_bias(y, params[4])
            }
            ModelKind::MtHybrid => {
                let a = g.matmul(h, params[3])?;
                let a = g.add_bias(a, params[4])?;
                let q = self.circuit.layer(g, a, params[5])?;
                let y = g.matmul(q, params[6])?;
                g.add_bias(y, params[7])
            }
        }
    }

    /// Batched inference; each input is a `[24 × F]` row-major window.
    pub fn predict(&self, inputs: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        const CHUNK: usize = 256;
        let mut out = Vec::with_capacity(inputs.len());
        for chunk in inputs.chunks(CHUNK) {
            let mut g = Graph::new();
            let params = self.bind_frozen(&mut g);
            let xs: Vec<Var> = time_major(chunk, INPUT_STEPS, self.n_features)?
                .into_iter()
                .map(|t| g.constant(t))
                .collect();
            let y = self.forward(&mut g, &params, &xs)?;
            let w = self.output_width();
            out.extend(g.value(y).data().chunks(w).map(<[f64]>::to_vec));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn head_counts() {
        let c = Model::new(ModelKind::MtClassical, 27, 143, 0).unwrap();
        assert_eq!(c.head_param_count(), 720);
        let h = Model::new(ModelKind::MtHybrid, 27, 143, 0).unwrap();
        assert_eq!(h.head_param_count(), (143 * 24 + 24) + 24 + (6 * 5 + 5));
        assert_eq!(h.head_param_count(), 3515);
        assert_eq!(
            c.param_count(),
            4 * (143 * 27 + 143 * 143 + 143) + 720
        );
    }

    #[test]
    fn output_shapes() {
        let x = vec![0.3; 24 * 27];
        for kind in [ModelKind::MtClassical, ModelKind::MtHybrid, ModelKind::MAll] {
            let m = Model::new(kind, 27, 8, 1).unwrap();
            let y = m.predict(&[&x, &x]).unwrap();
            assert_eq!(y.len(), 2);
            assert_eq!(y[0].len(), m.output_width());
            assert_eq!(y[0], y[1]);
        }
        assert_eq!(Model::new(ModelKind::MAll, 27, 8, 1).unwrap().output_width(), 135);
    }

    #[test]
    fn identity_circuit_feeds_ones_to_dense2() {
        let mut m = Model::new(ModelKind::MtHybrid, 4, 3, 2).unwrap();
        m.params[3] = Tensor::zeros(&[3, 24]);
        m.params[4] = Tensor::zeros(&[1, 24]);
        m.params[5] = Tensor::zeros(&[1, 24]);
        let y = m.predict(&[&[0.7; 24 * 4]]).unwrap();
        let w2 = &m.params[6];
        let b2 = &m.params[7];
        for o in 0..5 {
            let expect: f64 = (0..6).map(|q| w2.get(q, o)).sum::<f64>() + b2.get(0, o);
            assert!((y[0][o] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn kind_parsing() {
        for k in [ModelKind::MtClassical, ModelKind::MtHybrid, ModelKind::MAll] {
            assert_eq!(k.as_str().parse::<ModelKind>().unwrap(), k);
        }
        assert!("lstm".parse::<ModelKind>().is_err());
    }
}
