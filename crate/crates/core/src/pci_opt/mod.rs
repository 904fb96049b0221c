//! PCI policy search through a frozen all-feature forecaster, and a
//! receding-horizon loop against the synthetic plant.

mod closed_loop;
mod optimize;
mod problem;

pub use closed_loop::{closed_loop_eval, ClosedLoopConfig, ClosedLoopReport, DeviationStats, LoopStep};
pub use optimize::{optimize, OptimConfig, PciPolicy, TracePoint};
pub use problem::{composite_loss, loss_graph, simulate_policy, stack_with_zeroed_pci, write_policy, LossGraph, OptimProblem, DEFAULT_TARGET_C};
