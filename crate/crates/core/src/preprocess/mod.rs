//! Cleaning and shaping of raw minute logs into model-ready windows.

mod discretize;
mod impute;
mod iqr;
mod pipeline;
mod samples;
mod scaler;
mod series;

pub use discretize::discretize;
pub use impute::{complete_segments, impute, ImputePolicy};
pub use iqr::{iqr_correct, quantile, IqrBounds, DEFAULT_IQR_MULTIPLIER};
pub use pipeline::{assemble_temperature, preprocess_frame, PreprocessConfig, Sidecar, TEMPERATURE};
pub use samples::{make_samples, SampleSet, INPUT_STEPS, OUTPUT_STEPS, WINDOW_STEPS};
pub use scaler::MinMaxScaler;
pub use series::DiscretizedSeries;
