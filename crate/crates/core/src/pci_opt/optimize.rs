use crate::ad::{Adam, AdamConfig, Tensor};
use crate::error::{Error, Result};
use crate::models::MOptim;
use crate::preprocess::WINDOW_STEPS;

use super::problem::{loss_graph, OptimProblem};

#[derive(Clone, Debug, PartialEq)]
pub struct OptimConfig {
    pub iterations: usize,
    pub lr: f64,
    pub lambda: f64,
    pub target_c: f64,
    /// Loss above this (or non-finite) aborts the run.
    pub divergence: f64,
    pub seed: u64,
    /// Initial M_optim bias (scaled PCI).
    pub init_bias: f64,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self {
            iterations: 500,
            lr: 0.01,
            lambda: 1.0,
            target_c: super::DEFAULT_TARGET_C,
            divergence: 1e6,
            seed: 0,
            init_bias: 0.0,
        }
    }
}

impl OptimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Config("optimizer lr must be positive".into()));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config("lambda must be >= 0".into()));
        }
        if !self.target_c.is_finite() {
            return Err(Error::Config("target temperature must be finite".into()));
        }
        if !(self.divergence > 0.0) {
            return Err(Error::Config("divergence threshold must be positive".into()));
        }
        Ok(())
    }

    pub fn fresh_moptim(&self, n_features: usize) -> MOptim {
        MOptim::new(WINDOW_STEPS * n_features, self.init_bias, self.seed)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TracePoint {
    pub iteration: usize,
    pub loss: f64,
    pub policy: Vec<f64>,
}

/// Best policy found, in scaled units, with its predicted temperatures.
#[derive(Clone, Debug, PartialEq)]
pub struct PciPolicy {
    pub pci: Vec<f64>,
    pub predicted_t: Vec<f64>,
    pub loss: f64,
    pub iteration: usize,
    pub initial_loss: f64,
    pub trace: Vec<TracePoint>,
}

impl PciPolicy {
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("iteration,loss,p1,p2,p3,p4,p5\n");
        for t in &self.trace {
            s.push_str(&format!("{},{}", t.iteration, t.loss));
            for p in &t.policy {
                s.push_str(&format!(",{p}"));
            }
            s.push('\n');
        }
        s
    }
}

/// Adam on the policy model alone; M_all stays frozen. Evaluates the loss
/// `iterations + 1` times (before each step and after the last) and returns
/// the best policy seen. `moptim` is left at its final weights so a caller
/// can warm-start the next call.
pub fn optimize(problem: &OptimProblem<'_>, moptim: &mut MOptim, cfg: &OptimConfig) -> Result<PciPolicy> {
    cfg.validate()?;
    let future = problem.baseline_predict()?;
    let stacked = problem.stack_with_zeroed_pci(&future)?;
    let mut adam = Adam::new(
        AdamConfig {
            lr: cfg.lr,
            ..AdamConfig::default()
        },
        &[moptim.w.clone(), moptim.b.clone()],
    );
    let mut best: Option<PciPolicy> = None;
    let mut trace = Vec::with_capacity(cfg.iterations + 1);
    let mut initial_loss = f64::NAN;
    for it in 0..=cfg.iterations {
        let lg = loss_graph(problem, moptim, &stacked)?;
        let loss = lg.loss_value();
        if !loss.is_finite() || loss > cfg.divergence {
            return Err(Error::Diverged(format!("optimizer loss {loss} at iteration {it}")));
        }
        if it == 0 {
            initial_loss = loss;
        }
        let policy = lg.policy_values();
        trace.push(TracePoint {
            iteration: it,
            loss,
            policy: policy.clone(),
        });
        if best.as_ref().is_none_or(|b| loss < b.loss) {
            best = Some(PciPolicy {
                pci: policy,
                predicted_t: lg.temp_values(),
                loss,
                iteration: it,
                initial_loss,
                trace: Vec::new(),
            });
        }
        if it == cfg.iterations {
            break;
        }
        let grads = lg.graph.backward(lg.loss)?;
        let gw = grads.get(lg.w).cloned().unwrap_or_else(|| Tensor::zeros(moptim.w.shape()));
        let gb = grads.get(lg.b).cloned().unwrap_or_else(|| Tensor::zeros(moptim.b.shape()));
        let mut params = [std::mem::replace(&mut moptim.w, Tensor::scalar(0.0)), std::mem::replace(&mut moptim.b, Tensor::scalar(0.0))];
        let step = adam.step(&mut params, &[gw, gb]);
        let [w, b] = params;
        moptim.w = w;
        moptim.b = b;
        step?;
    }
    let mut best = best.expect("at least one evaluation");
    best.trace = trace;
    Ok(best)
}
