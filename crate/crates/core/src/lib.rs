//! Furnace temperature forecasting and PCI control.

pub mod ad;
pub mod commands;
pub mod dataio;
pub mod featsel;
mod error;
pub mod fsutil;
pub mod kv;
pub mod models;
pub mod pci_opt;
pub mod preprocess;
pub mod qsim;
pub mod trainer;

pub use error::{Error, Result};
