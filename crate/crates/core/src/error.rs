use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {detail}")]
    Shape { op: &'static str, detail: String },

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("backward root must be a scalar, got shape {0:?}")]
    NonScalarRoot(Vec<usize>),

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitRange { index: usize, n_qubits: usize },

    #[error("CNOT control and target coincide (qubit {0})")]
    SameQubit(usize),

    #[error("state is not normalized: squared norm {0}")]
    Unnormalized(f64),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("{0} used before fitting")]
    NotFitted(&'static str),

    #[error("training diverged: {0}")]
    Diverged(String),

    #[error("scaler fingerprint mismatch: expected {expected:016x}, got {actual:016x}")]
    UnitMismatch { expected: u64, actual: u64 },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn shape(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Shape {
            op,
            detail: detail.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Short machine-readable tag, used by the CLI's one-line error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Shape { .. } => "shape",
            Error::NonFinite(_) => "non_finite",
            Error::NonScalarRoot(_) => "non_scalar_root",
            Error::QubitRange { .. } => "qubit_range",
            Error::SameQubit(_) => "same_qubit",
            Error::Unnormalized(_) => "unnormalized",
            Error::Parse { .. } => "parse",
            Error::Config(_) => "config",
            Error::Domain(_) => "domain",
            Error::Insufficient(_) => "insufficient_data",
            Error::NotFitted(_) => "not_fitted",
            Error::Diverged(_) => "diverged",
            Error::UnitMismatch { .. } => "unit_mismatch",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }
}
