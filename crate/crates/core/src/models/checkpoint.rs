use std::path::{Path, PathBuf};

use super::{Model, ModelKind};
use crate::error::{Error, Result};
use crate::fsutil::{read_to_string, write_atomic};
use crate::kv::{KvMap, KvWriter};
use crate::ad::Tensor;
use crate::preprocess::MinMaxScaler;
use crate::qsim::QdiCircuit;

/// A model together with the feature order and scaling it was trained in.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub model: Model,
    /// Scaler restricted to the model's features, in input order.
    pub scaler: MinMaxScaler,
    pub l_window: usize,
}

pub fn manifest_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

impl Checkpoint {
    pub fn features(&self) -> &[String] {
        self.scaler.names()
    }

    /// Writes little-endian f64 parameters to `path` and a text manifest to
    /// `path.manifest`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let m = &self.model;
        let mut bytes = Vec::with_capacity(8 * m.param_count());
        for p in &m.params {
            for v in p.data() {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
        }
        let n = self.scaler.names().len();
        let mut w = KvWriter::new();
        w.put("kind", m.kind)
            .put("n_features", m.n_features)
            .put("hidden", m.hidden)
            .put("n_qubits", m.circuit.n_qubits)
            .put("depth", m.circuit.depth)
            .put("l_window", self.l_window)
            .put_list("features", self.scaler.names())
            .put_list("scaler_min", &(0..n).map(|i| self.scaler.min(i)).collect::<Vec<_>>())
            .put_list("scaler_max", &(0..n).map(|i| self.scaler.max(i)).collect::<Vec<_>>())
            .put("scaler_fingerprint", format!("{:016x}", self.scaler.fingerprint()));
        let shapes: Vec<String> = m
            .param_names()
            .iter()
            .zip(&m.params)
            .map(|(name, t)| {
                let dims: Vec<String> = t.shape().iter().map(ToString::to_string).collect();
                format!("{name}:{}", dims.join("x"))
            })
            .collect();
        w.put_list("params", &shapes);
        write_atomic(path, &bytes)?;
        write_atomic(manifest_path(path), w.finish().as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut kv = KvMap::parse(&read_to_string(manifest_path(path))?)?;
        let need = |v: Option<usize>, k: &str| {
            v.ok_or_else(|| Error::Parse { line: 0, msg: format!("manifest lacks {k}") })
        };
        let kind: ModelKind = kv
            .take::<String>("kind")?
            .ok_or_else(|| Error::Parse { line: 0, msg: "manifest lacks kind".into() })?
            .parse()?;
        let n_features = need(kv.take("n_features")?, "n_features")?;
        let hidden = need(kv.take("hidden")?, "hidden")?;
        let n_qubits = need(kv.take("n_qubits")?, "n_qubits")?;
        let depth = need(kv.take("depth")?, "depth")?;
        let l_window = need(kv.take("l_window")?, "l_window")?;
        let features: Vec<String> = kv.take_list("features")?.unwrap_or_default();
        let smin: Vec<f64> = kv.take_list("scaler_min")?.unwrap_or_default();
        let smax: Vec<f64> = kv.take_list("scaler_max")?.unwrap_or_default();
        let fingerprint: Option<String> = kv.take("scaler_fingerprint")?;
        let shapes: Vec<String> = kv.take_list("params")?.unwrap_or_default();
        kv.finish()?;

        if features.len() != n_features {
            return Err(Error::Parse {
                line: 0,
                msg: format!("{} feature names for n_features={n_features}", features.len()),
            });
        }
        let scaler = MinMaxScaler::from_parts(features, smin, smax)?;
        if let Some(fp) = fingerprint {
            let expected = u64::from_str_radix(&fp, 16).map_err(|e| Error::Parse {
                line: 0,
                msg: format!("scaler_fingerprint: {e}"),
            })?;
            let actual = scaler.fingerprint();
            if expected != actual {
                return Err(Error::UnitMismatch { expected, actual });
            }
        }
        let circuit = QdiCircuit::new(n_qubits, depth)?;
        let layout = Model::layout(kind, n_features, hidden, &circuit);
        let expected: Vec<String> = layout
            .iter()
            .map(|(name, shape)| {
                let dims: Vec<String> = shape.iter().map(ToString::to_string).collect();
                format!("{name}:{}", dims.join("x"))
            })
            .collect();
        if shapes != expected {
            return Err(Error::Parse {
                line: 0,
                msg: "parameter shapes in manifest do not match the model kind".into(),
            });
        }
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let total: usize = layout.iter().map(|(_, s)| s.iter().product::<usize>()).sum();
        if bytes.len() != 8 * total {
            return Err(Error::Parse {
                line: 0,
                msg: format!("parameter file holds {} bytes, expected {}", bytes.len(), 8 * total),
            });
        }
        let mut values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
        let params = layout
            .into_iter()
            .map(|(_, shape)| {
                let n = shape.iter().product();
                Tensor::new(shape, values.by_ref().take(n).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            model: Model {
                kind,
                n_features,
                hidden,
                circuit,
                params,
            },
            scaler,
            l_window,
        })
    }
}
