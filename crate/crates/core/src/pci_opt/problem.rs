use crate::ad::{Graph, Tensor, Var};
use crate::dataio::PCI_CHANNEL;
use crate::error::{Error, Result};
use crate::models::{Checkpoint, MOptim, ModelKind};
use crate::preprocess::{INPUT_STEPS, OUTPUT_STEPS, TEMPERATURE, WINDOW_STEPS};

pub const DEFAULT_TARGET_C: f64 = 1510.0;

/// One optimization instance: a frozen all-feature model and the scaled
/// 24-step history it starts from.
#[derive(Clone, Debug)]
pub struct OptimProblem<'a> {
    pub model: &'a Checkpoint,
    /// `[24 × F]`, scaled with the model's scaler.
    pub history: Tensor,
    pub target_c: f64,
    pub target_scaled: f64,
    pub lambda: f64,
    pub pci_idx: usize,
    pub t_idx: usize,
}

impl<'a> OptimProblem<'a> {
    /// `units` is the fingerprint of the scaler that produced `history`;
    /// it must match the model's.
    pub fn new(
        model: &'a Checkpoint,
        history: Tensor,
        units: u64,
        target_c: f64,
        lambda: f64,
    ) -> Result<Self> {
        if model.model.kind != ModelKind::MAll {
            return Err(Error::Config(format!(
                "optimization needs an mall checkpoint, got {}",
                model.model.kind
            )));
        }
        let expected = model.scaler.fingerprint();
        if units != expected {
            return Err(Error::UnitMismatch { expected, actual: units });
        }
        let f = model.model.n_features;
        if history.shape() != [INPUT_STEPS, f] {
            return Err(Error::shape(
                "optim_problem",
                format!("history {:?}, expected [{INPUT_STEPS}, {f}]", history.shape()),
            ));
        }
        let idx = |name: &str| {
            model
                .scaler
                .index(name)
                .ok_or_else(|| Error::Domain(format!("model features lack {name}")))
        };
        let t_idx = idx(TEMPERATURE)?;
        let pci_idx = idx(PCI_CHANNEL)?;
        if !(lambda >= 0.0) {
            return Err(Error::Config("lambda must be >= 0".into()));
        }
        Ok(Self {
            model,
            history,
            target_c,
            target_scaled: model.scaler.transform_value(t_idx, target_c)?,
            lambda,
            pci_idx,
            t_idx,
        })
    }

    pub fn n_features(&self) -> usize {
        self.model.model.n_features
    }

    /// Step 1: M_all's `[5 × F]` forecast from the history.
    pub fn baseline_predict(&self) -> Result<Tensor> {
        let y = self.model.model.predict(&[self.history.data()])?;
        Tensor::new(vec![OUTPUT_STEPS, self.n_features()], y.into_iter().next().expect("one sample"))
    }

    /// Step 2: history over forecast, forecast PCI set to zero.
    pub fn stack_with_zeroed_pci(&self, future: &Tensor) -> Result<Tensor> {
        stack_with_zeroed_pci(&self.history, future, self.pci_idx)
    }
}

/// `[24 × F]` over `[5 × F]` with column `pci_idx` of the lower block zeroed.
pub fn stack_with_zeroed_pci(history: &Tensor, future: &Tensor, pci_idx: usize) -> Result<Tensor> {
    let (hr, hc) = history.dims2()?;
    let (fr, fc) = future.dims2()?;
    if hr != INPUT_STEPS || fr != OUTPUT_STEPS || hc != fc || pci_idx >= hc {
        return Err(Error::shape(
            "stack",
            format!("history [{hr}x{hc}], future [{fr}x{fc}], pci column {pci_idx}"),
        ));
    }
    let mut fut = future.clone();
    for r in 0..fr {
        fut.set(r, pci_idx, 0.0);
    }
    Tensor::vstack(&[history, &fut])
}

/// `L1(temps, target) + λ·Σ[max(0, p − 1) + max(0, −p)]`.
pub fn composite_loss(temps: &[f64], policy: &[f64], target: f64, lambda: f64) -> f64 {
    let dev: f64 = temps.iter().map(|t| (t - target).abs()).sum();
    let pen: f64 = policy.iter().map(|p| (p - 1.0).max(0.0) + (-p).max(0.0)).sum();
    dev + lambda * pen
}

/// Graph nodes of one evaluation of Steps 3–6.
pub struct LossGraph {
    pub graph: Graph,
    pub w: Var,
    pub b: Var,
    pub policy: Var,
    pub temps: Var,
    pub loss: Var,
}

impl LossGraph {
    pub fn loss_value(&self) -> f64 {
        self.graph.value(self.loss).data()[0]
    }

    pub fn policy_values(&self) -> Vec<f64> {
        self.graph.value(self.policy).data().to_vec()
    }

    pub fn temp_values(&self) -> Vec<f64> {
        self.graph.value(self.temps).data().to_vec()
    }
}

/// Builds Steps 3–6 for policy model `(w, b)` over the zero-PCI `stacked`
/// matrix: propose, write the policy into the last five rows, run M_all
/// on the trailing 24 rows, score its temperature forecasts.
pub fn loss_graph(problem: &OptimProblem<'_>, moptim: &MOptim, stacked: &Tensor) -> Result<LossGraph> {
    let f = problem.n_features();
    if stacked.shape() != [WINDOW_STEPS, f] {
        return Err(Error::shape("loss_graph", format!("stack {:?}", stacked.shape())));
    }
    let mut g = Graph::new();
    let w = g.param(moptim.w.clone());
    let b = g.param(moptim.b.clone());
    let x = g.constant(Tensor::row_vector(stacked.data().to_vec()));
    let policy = MOptim::forward(&mut g, w, b, x)?;

    // Window = trailing 24 rows; its last five rows carry the policy in
    // the PCI column: base + L · policyᵀ · e_pci.
    let base = g.constant(stacked.slice_rows(OUTPUT_STEPS, WINDOW_STEPS)?);
    let mut place = Tensor::zeros(&[INPUT_STEPS, OUTPUT_STEPS]);
    for k in 0..OUTPUT_STEPS {
        place.set(INPUT_STEPS - OUTPUT_STEPS + k, k, 1.0);
    }
    let mut e_pci = Tensor::zeros(&[1, f]);
    e_pci.set(0, problem.pci_idx, 1.0);
    let place = g.constant(place);
    let e_pci = g.constant(e_pci);
    let pt = g.transpose(policy)?;
    let col = g.matmul(place, pt)?;
    let spread = g.matmul(col, e_pci)?;
    let window = g.add(base, spread)?;

    let params = problem.model.model.bind_frozen(&mut g);
    let xs = (0..INPUT_STEPS)
        .map(|t| g.slice_rows(window, t, t + 1))
        .collect::<Result<Vec<_>>>()?;
    let out = problem.model.model.forward(&mut g, &params, &xs)?;
    let mut pick = Tensor::zeros(&[OUTPUT_STEPS * f, OUTPUT_STEPS]);
    for k in 0..OUTPUT_STEPS {
        pick.set(k * f + problem.t_idx, k, 1.0);
    }
    let pick = g.constant(pick);
    let temps = g.matmul(out, pick)?;

    let target = g.constant(Tensor::full(&[1, OUTPUT_STEPS], problem.target_scaled));
    let dev = g.l1_loss(temps, target)?;
    let one = g.constant(Tensor::scalar(1.0));
    let over = g.sub(policy, one)?;
    let over = g.relu(over)?;
    let neg = g.scale(policy, -1.0)?;
    let under = g.relu(neg)?;
    let pen = g.add(over, under)?;
    let pen = g.sum(pen)?;
    let pen = g.scale(pen, problem.lambda)?;
    let loss = g.add(dev, pen)?;
    Ok(LossGraph {
        graph: g,
        w,
        b,
        policy,
        temps,
        loss,
    })
}

/// Step 4: `stacked` with `policy` written into the PCI column of its last
/// five rows; every other cell is copied unchanged.
pub fn write_policy(stacked: &Tensor, policy: &[f64], pci_idx: usize) -> Result<Tensor> {
    let (rows, cols) = stacked.dims2()?;
    if rows != WINDOW_STEPS || pci_idx >= cols || policy.len() != OUTPUT_STEPS {
        return Err(Error::shape(
            "write_policy",
            format!("stack [{rows}x{cols}], pci column {pci_idx}, policy of {}", policy.len()),
        ));
    }
    let mut out = stacked.clone();
    for (k, p) in policy.iter().enumerate() {
        out.set(INPUT_STEPS + k, pci_idx, *p);
    }
    Ok(out)
}

/// Steps 4–5 without the policy model: scaled temperature forecasts when
/// `policy` is written into the zero-PCI stack.
pub fn simulate_policy(problem: &OptimProblem<'_>, stacked: &Tensor, policy: &[f64]) -> Result<Vec<f64>> {
    let window = write_policy(stacked, policy, problem.pci_idx)?.slice_rows(OUTPUT_STEPS, WINDOW_STEPS)?;
    let y = problem.model.model.predict(&[window.data()])?;
    let f = problem.n_features();
    Ok((0..OUTPUT_STEPS).map(|k| y[0][k * f + problem.t_idx]).collect())
}
