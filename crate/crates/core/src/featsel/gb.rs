use crate::error::{Error, Result};

use super::tree::{fit_tree, Presorted, RegressionTree};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GbConfig {
    pub rounds: usize,
    pub max_depth: usize,
    pub shrinkage: f64,
}

impl Default for GbConfig {
    fn default() -> Self {
        Self {
            rounds: 100,
            max_depth: 3,
            shrinkage: 0.1,
        }
    }
}

impl GbConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 {
            return Err(Error::Config("gb max_depth must be positive".into()));
        }
        if !(self.shrinkage > 0.0 && self.shrinkage <= 1.0) {
            return Err(Error::Config("gb shrinkage must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Least-squares gradient boosting: `init + ν·Σ tree(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GbModel {
    pub init: f64,
    pub shrinkage: f64,
    pub n_features: usize,
    pub trees: Vec<RegressionTree>,
    /// Training MSE after each round, starting with the init-only model.
    pub train_mse: Vec<f64>,
}

impl GbModel {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        self.init + self.shrinkage * self.trees.iter().map(|t| t.predict_row(x)).sum::<f64>()
    }

    /// Total split gain per feature.
    pub fn raw_importance(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.n_features];
        for t in &self.trees {
            t.add_importance(&mut acc);
        }
        acc
    }
}

/// Fits on column-major features.
pub fn fit_gb(columns: &[Vec<f64>], y: &[f64], cfg: &GbConfig) -> Result<GbModel> {
    cfg.validate()?;
    let n = y.len();
    if n < 2 {
        return Err(Error::Insufficient(format!("boosting needs at least 2 samples, got {n}")));
    }
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::shape("fit_gb", "feature and target lengths differ"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("boosting target"));
    }
    let init = y.iter().sum::<f64>() / n as f64;
    let mut model = GbModel {
        init,
        shrinkage: cfg.shrinkage,
        n_features: columns.len(),
        trees: Vec::new(),
        train_mse: Vec::new(),
    };
    let mut pred = vec![init; n];
    let mse = |pred: &[f64]| pred.iter().zip(y).map(|(p, t)| (t - p).powi(2)).sum::<f64>() / n as f64;
    model.train_mse.push(mse(&pred));
    if y.iter().all(|&v| v == y[0]) {
        return Ok(model);
    }
    let data = Presorted::new(columns.to_vec())?;
    let mut resid = vec![0.0; n];
    for _ in 0..cfg.rounds {
        for i in 0..n {
            resid[i] = y[i] - pred[i];
        }
        let tree = fit_tree(&data, &resid, cfg.max_depth)?;
        for (i, p) in pred.iter_mut().enumerate() {
            *p += cfg.shrinkage * tree.predict_sample(&data.columns, i);
        }
        model.trees.push(tree);
        model.train_mse.push(mse(&pred));
    }
    Ok(model)
}
