//! Training loops, the chronological split, and forecast metrics.

mod metrics;
mod report;
mod train;

pub use metrics::{mae, rmse};
pub use report::{
    build_samples, compare_models, evaluate, predict_temperature, Comparison, EvalReport,
    HorizonMetrics,
};
pub use train::{
    batch_gradients, mean_loss, split, train, EpochLoss, TrainConfig, TrainOutcome,
};
