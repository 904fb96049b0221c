//! Command logic behind the `furnace` binary. Every command reads and
//! writes files only; outputs depend on inputs and the seed alone.

mod config;
mod ops;

pub use config::{env_seed, RunConfig, SEED_ENV};
pub use ops::{
    cmd_closed_loop, cmd_evaluate, cmd_generate, cmd_optimize, cmd_pipeline, cmd_preprocess,
    cmd_select_features, cmd_train, curve_path, latest_history, OptimSummary, PipelineOutcome,
    FEATURES, IMPORTANCE_PCI, IMPORTANCE_T, LOOP_LOG, LOOP_SUMMARY, OPTIM_SUMMARY, POLICY, TRACE,
};
