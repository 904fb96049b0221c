//! The forecasting networks and the linear policy model.

mod checkpoint;
mod lstm;
mod moptim;
mod nets;

pub use checkpoint::{manifest_path, Checkpoint};
pub use lstm::{lstm_forward, lstm_param_count, time_major, LstmVars};
pub use moptim::MOptim;
pub use nets::{Model, ModelKind, DEFAULT_HIDDEN_MALL, DEFAULT_HIDDEN_MT};
