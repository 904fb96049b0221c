//! Sensor logs: CSV ingestion, the synthetic plant, and reductant formulas.

mod formulas;
mod frame;
mod plant;

pub use formulas::{pci_rate, rar, ReductantInputs};
pub use frame::{
    format_timestamp, is_missing, load_csv, parse_timestamp, read_csv, save_csv, write_csv,
    SensorFrame, PCI_CHANNEL, TAP_COLUMNS,
};
pub use plant::{
    default_start, generate_plant, generate_plant_from, Excitation, FrameRecorder, Plant,
    PlantConfig, PlantReading, DELAY_RANGE, NOMINAL_PCI,
};
