//! Exact state-vector simulation of small qubit registers.

mod qdi;
mod state;

pub use qdi::{QdiCircuit, QdiJacobian, DEFAULT_DEPTH, DEFAULT_QUBITS};
pub use state::{QuantumState, NORM_TOLERANCE};
