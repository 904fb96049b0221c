use crate::ad::Tensor;
use crate::error::{Error, Result};

use super::DiscretizedSeries;

pub const INPUT_STEPS: usize = 24;
pub const OUTPUT_STEPS: usize = 5;
pub const WINDOW_STEPS: usize = INPUT_STEPS + OUTPUT_STEPS;

/// Sliding-window samples.
///
/// Sample `i` reads steps `starts[i] .. starts[i]+24` as input and the next
/// five steps as targets.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub n_features: usize,
    /// Column of the forecast target within each row.
    pub target: usize,
    pub starts: Vec<usize>,
    /// `[N × 24 × F]`, flattened.
    pub inputs: Vec<f64>,
    /// `[N × 5]`.
    pub targets_t: Vec<f64>,
    /// `[N × 5 × F]`, flattened.
    pub targets_all: Vec<f64>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    pub fn input(&self, i: usize) -> &[f64] {
        let w = INPUT_STEPS * self.n_features;
        &self.inputs[i * w..(i + 1) * w]
    }

    pub fn target_t(&self, i: usize) -> &[f64] {
        &self.targets_t[i * OUTPUT_STEPS..(i + 1) * OUTPUT_STEPS]
    }

    pub fn target_all(&self, i: usize) -> &[f64] {
        let w = OUTPUT_STEPS * self.n_features;
        &self.targets_all[i * w..(i + 1) * w]
    }

    /// Samples `range` in order.
    pub fn subset(&self, idx: impl IntoIterator<Item = usize>) -> SampleSet {
        let mut out = SampleSet {
            n_features: self.n_features,
            target: self.target,
            starts: Vec::new(),
            inputs: Vec::new(),
            targets_t: Vec::new(),
            targets_all: Vec::new(),
        };
        for i in idx {
            out.starts.push(self.starts[i]);
            out.inputs.extend_from_slice(self.input(i));
            out.targets_t.extend_from_slice(self.target_t(i));
            out.targets_all.extend_from_slice(self.target_all(i));
        }
        out
    }

    /// Input window of sample `i` as a `[24 × F]` tensor.
    pub fn input_tensor(&self, i: usize) -> Tensor {
        Tensor::new(vec![INPUT_STEPS, self.n_features], self.input(i).to_vec())
            .expect("sample width is fixed at construction")
    }
}

/// Stride-1 windows over `series`, skipping any window that straddles a gap
/// between segments.
pub fn make_samples(series: &DiscretizedSeries, target: usize) -> Result<SampleSet> {
    let f = series.n_features();
    if target >= f {
        return Err(Error::shape("make_samples", format!("target {target} out of {f} features")));
    }
    if series.steps() < WINDOW_STEPS {
        return Err(Error::Insufficient(format!(
            "need at least {WINDOW_STEPS} discrete steps, got {}",
            series.steps()
        )));
    }
    let mut out = SampleSet {
        n_features: f,
        target,
        starts: Vec::new(),
        inputs: Vec::new(),
        targets_t: Vec::new(),
        targets_all: Vec::new(),
    };
    for s in 0..=series.steps() - WINDOW_STEPS {
        if !series.is_contiguous(s, s + WINDOW_STEPS - 1) {
            continue;
        }
        out.starts.push(s);
        for r in &series.rows[s..s + INPUT_STEPS] {
            out.inputs.extend_from_slice(r);
        }
        for r in &series.rows[s + INPUT_STEPS..s + WINDOW_STEPS] {
            out.targets_t.push(r[target]);
            out.targets_all.extend_from_slice(r);
        }
    }
    if out.is_empty() {
        return Err(Error::Insufficient("no contiguous 29-step window".into()));
    }
    Ok(out)
}
