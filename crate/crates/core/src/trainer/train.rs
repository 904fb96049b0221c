use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ad::{Adam, AdamConfig, Graph, Tensor, Var};
use crate::error::{Error, Result};
use crate::models::{time_major, Model, ModelKind};
use crate::preprocess::{SampleSet, INPUT_STEPS};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
    pub split_ratio: f64,
    /// Trailing fraction of the training split held out for early stopping.
    pub val_fraction: f64,
    /// Epochs without validation improvement before stopping; 0 disables.
    pub patience: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            batch_size: 32,
            lr: 1e-3,
            seed: 0,
            split_ratio: 0.8,
            val_fraction: 0.1,
            patience: 10,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::Config("lr must be finite and >= 0".into()));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::Config("split_ratio must lie in (0, 1)".into()));
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            return Err(Error::Config("val_fraction must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Chronological split: the first `floor(n·ratio)` samples train, the rest
/// test.
pub fn split(set: &SampleSet, ratio: f64) -> Result<(SampleSet, SampleSet)> {
    let n = set.len();
    if n < 5 {
        return Err(Error::Insufficient(format!("split needs at least 5 samples, got {n}")));
    }
    let n_train = ((n as f64) * ratio).floor() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::Insufficient(format!("ratio {ratio} leaves an empty side of {n}")));
    }
    Ok((set.subset(0..n_train), set.subset(n_train..n)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train_loss: f64,
    /// NaN when no validation split is used.
    pub val_loss: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub curve: Vec<EpochLoss>,
    /// Epoch (1-based) whose parameters were kept.
    pub best_epoch: usize,
    pub stopped_early: bool,
}

impl TrainOutcome {
    /// `epoch,train_loss,val_loss`.
    pub fn curve_csv(&self) -> String {
        let mut s = String::from("epoch,train_loss,val_loss\n");
        for e in &self.curve {
            s.push_str(&format!("{},{:e},{:e}\n", e.epoch, e.train_loss, e.val_loss));
        }
        s
    }
}

fn targets_of<'a>(model: &Model, set: &'a SampleSet, i: usize) -> &'a [f64] {
    match model.kind {
        ModelKind::MAll => set.target_all(i),
        _ => set.target_t(i),
    }
}

/// Mean squared error of the model over `set` (the training loss measure).
pub fn mean_loss(model: &Model, set: &SampleSet) -> Result<f64> {
    let inputs: Vec<&[f64]> = (0..set.len()).map(|i| set.input(i)).collect();
    let preds = model.predict(&inputs)?;
    let mut s = 0.0;
    let mut n = 0usize;
    for (i, p) in preds.iter().enumerate() {
        for (a, b) in p.iter().zip(targets_of(model, set, i)) {
            s += (a - b) * (a - b);
            n += 1;
        }
    }
    Ok(s / n.max(1) as f64)
}

/// One graph over a mini-batch; returns the loss and parameter gradients.
pub fn batch_gradients(model: &Model, set: &SampleSet, idx: &[usize]) -> Result<(f64, Vec<Tensor>)> {
    let mut g = Graph::new();
    let params = model.bind(&mut g);
    let inputs: Vec<&[f64]> = idx.iter().map(|&i| set.input(i)).collect();
    let xs: Vec<Var> = time_major(&inputs, INPUT_STEPS, model.n_features)?
        .into_iter()
        .map(|t| g.constant(t))
        .collect();
    let y = model.forward(&mut g, &params, &xs)?;
    let w = model.output_width();
    let mut target = Vec::with_capacity(idx.len() * w);
    for &i in idx {
        target.extend_from_slice(targets_of(model, set, i));
    }
    let t = g.constant(Tensor::new(vec![idx.len(), w], target)?);
    let loss = g.l2_loss(y, t)?;
    let grads = g.backward(loss)?;
    let out = params
        .iter()
        .map(|&p| grads.get(p).cloned().expect("trainable leaf has an adjoint"))
        .collect();
    Ok((g.value(loss).data()[0], out))
}

/// Adam on mini-batches of the training set with early stopping on the
/// trailing validation slice. The best-validation parameters are kept.
pub fn train(model: &mut Model, data: &SampleSet, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if data.n_features != model.n_features {
        return Err(Error::shape("train", "sample width differs from model input"));
    }
    let n = data.len();
    let n_val = ((n as f64) * cfg.val_fraction).floor() as usize;
    let n_fit = n - n_val;
    if n_fit == 0 {
        return Err(Error::Insufficient("no training samples".into()));
    }
    let val = data.subset(n_fit..n);
    let mut order: Vec<usize> = (0..n_fit).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = Adam::new(
        AdamConfig {
            lr: cfg.lr,
            ..AdamConfig::default()
        },
        &model.params,
    );
    let mut curve = Vec::with_capacity(cfg.epochs);
    let mut best = (f64::INFINITY, 0usize, model.params.clone());
    let mut stopped_early = false;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            let (loss, grads) = batch_gradients(model, data, batch).map_err(|e| match e {
                Error::NonFinite(op) => Error::Diverged(format!(
                    "non-finite value in {op} at epoch {epoch}, batch {b}"
                )),
                other => other,
            })?;
            if !loss.is_finite() {
                return Err(Error::Diverged(format!("loss {loss} at epoch {epoch}, batch {b}")));
            }
            total += loss * batch.len() as f64;
            adam.step(&mut model.params, &grads)?;
        }
        let train_loss = total / n_fit as f64;
        let val_loss = if val.is_empty() { f64::NAN } else { mean_loss(model, &val)? };
        curve.push(EpochLoss { epoch, train_loss, val_loss });

        let score = if val.is_empty() { train_loss } else { val_loss };
        if score < best.0 {
            best = (score, epoch, model.params.clone());
        } else if cfg.patience > 0 && epoch - best.1 >= cfg.patience {
            stopped_early = true;
            break;
        }
    }
    let best_epoch = if best.1 == 0 { curve.len() } else { best.1 };
    if best.1 > 0 {
        model.params = best.2;
    }
    Ok(TrainOutcome {
        curve,
        best_epoch,
        stopped_early,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::{make_samples, DiscretizedSeries};

    fn toy_set(steps: usize) -> SampleSet {
        let rows = (0..steps)
            .map(|k| {
                let x = (k as f64 * 0.3).sin() * 0.5 + 0.5;
                vec![x, 1.0 - x]
            })
            .collect();
        let s = DiscretizedSeries {
            l_window: 10,
            names: vec!["a".into(), "t".into()],
            timestamps: (0..steps as i64).map(|k| 10 * k).collect(),
            rows,
        };
        make_samples(&s, 1).unwrap()
    }

    #[test]
    fn split_is_chronological() {
        let set = toy_set(38);
        assert_eq!(set.len(), 10);
        let (tr, te) = split(&set, 0.8).unwrap();
        assert_eq!((tr.len(), te.len()), (8, 2));
        assert!(tr.starts.iter().all(|s| !te.starts.contains(s)));
        assert!(tr.starts.last().unwrap() + 23 < te.starts[0] + 24);
        assert!(split(&toy_set(32), 0.8).is_err());
    }

    #[test]
    fn zero_lr_keeps_parameters() {
        let set = toy_set(60);
        let mut m = Model::new(ModelKind::MtClassical, 2, 3, 0).unwrap();
        let before = m.params.clone();
        let cfg = TrainConfig { epochs: 2, lr: 0.0, patience: 0, ..TrainConfig::default() };
        train(&mut m, &set, &cfg).unwrap();
        assert_eq!(m.params, before);
    }

    #[test]
    fn loss_decreases_on_a_periodic_series() {
        let set = toy_set(200);
        let mut m = Model::new(ModelKind::MtClassical, 2, 6, 1).unwrap();
        let cfg = TrainConfig { epochs: 30, lr: 1e-2, patience: 0, ..TrainConfig::default() };
        let out = train(&mut m, &set, &cfg).unwrap();
        assert!(out.curve.last().unwrap().train_loss < 0.2 * out.curve[0].train_loss);
    }
}
