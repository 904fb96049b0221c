use serde::Serialize;

use super::{mae, rmse};
use crate::error::{Error, Result};
use crate::models::{Checkpoint, ModelKind};
use crate::preprocess::{
    make_samples, DiscretizedSeries, MinMaxScaler, SampleSet, OUTPUT_STEPS, TEMPERATURE,
};

/// Scales the `features` columns of `series` with `scaler` and cuts
/// windows with temperature as the forecast target.
pub fn build_samples(
    series: &DiscretizedSeries,
    scaler: &MinMaxScaler,
    features: &[String],
) -> Result<SampleSet> {
    let scaler = scaler.select(features)?;
    let mut sub = series.select(features)?;
    scaler.transform_rows(&mut sub.rows)?;
    let target = sub.require(TEMPERATURE)?;
    make_samples(&sub, target)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HorizonMetrics {
    /// 1-based forecast step.
    pub step: usize,
    pub minutes: usize,
    pub rmse: f64,
    pub mae: f64,
    pub rmse_celsius: f64,
    pub mae_celsius: f64,
    pub persistence_rmse_celsius: f64,
}

/// Temperature forecast accuracy on a test set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub model: String,
    pub n_test: usize,
    pub param_count: usize,
    pub head_param_count: usize,
    pub horizons: Vec<HorizonMetrics>,
    pub rmse: f64,
    pub mae: f64,
    pub rmse_celsius: f64,
    pub mae_celsius: f64,
    pub persistence_rmse_celsius: f64,
    /// `(persistence − model) / persistence` on °C RMSE.
    pub improvement_over_persistence: f64,
}

/// Temperature predictions `[N][5]` in scaled units; for the all-feature
/// model the temperature column of its output.
pub fn predict_temperature(ck: &Checkpoint, set: &SampleSet) -> Result<Vec<Vec<f64>>> {
    let m = &ck.model;
    if set.n_features != m.n_features {
        return Err(Error::shape("evaluate", "sample width differs from model input"));
    }
    let inputs: Vec<&[f64]> = (0..set.len()).map(|i| set.input(i)).collect();
    let preds = m.predict(&inputs)?;
    Ok(match m.kind {
        ModelKind::MAll => preds
            .into_iter()
            .map(|p| (0..OUTPUT_STEPS).map(|k| p[k * m.n_features + set.target]).collect())
            .collect(),
        _ => preds,
    })
}

pub fn evaluate(ck: &Checkpoint, set: &SampleSet) -> Result<EvalReport> {
    let t_idx = ck
        .scaler
        .index(TEMPERATURE)
        .ok_or_else(|| Error::Domain("checkpoint scaler lacks temperature".into()))?;
    if t_idx != set.target {
        return Err(Error::Domain("temperature column differs between model and data".into()));
    }
    let preds = predict_temperature(ck, set)?;
    let to_c = |v: f64| ck.scaler.inverse_value(t_idx, v);
    let last_obs: Vec<f64> = (0..set.len())
        .map(|i| set.input(i)[(crate::preprocess::INPUT_STEPS - 1) * set.n_features + set.target])
        .collect();

    let mut horizons = Vec::with_capacity(OUTPUT_STEPS);
    let (mut all_y, mut all_p, mut all_yc, mut all_pc, mut all_base) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for k in 0..OUTPUT_STEPS {
        let y: Vec<f64> = (0..set.len()).map(|i| set.target_t(i)[k]).collect();
        let p: Vec<f64> = preds.iter().map(|r| r[k]).collect();
        let yc = y.iter().map(|&v| to_c(v)).collect::<Result<Vec<_>>>()?;
        let pc = p.iter().map(|&v| to_c(v)).collect::<Result<Vec<_>>>()?;
        let base = last_obs.iter().map(|&v| to_c(v)).collect::<Result<Vec<_>>>()?;
        horizons.push(HorizonMetrics {
            step: k + 1,
            minutes: (k + 1) * ck.l_window,
            rmse: rmse(&y, &p)?,
            mae: mae(&y, &p)?,
            rmse_celsius: rmse(&yc, &pc)?,
            mae_celsius: mae(&yc, &pc)?,
            persistence_rmse_celsius: rmse(&yc, &base)?,
        });
        all_y.extend(y);
        all_p.extend(p);
        all_yc.extend(yc);
        all_pc.extend(pc);
        all_base.extend(base);
    }
    let rmse_c = rmse(&all_yc, &all_pc)?;
    let pers = rmse(&all_yc, &all_base)?;
    Ok(EvalReport {
        model: ck.model.kind.to_string(),
        n_test: set.len(),
        param_count: ck.model.param_count(),
        head_param_count: ck.model.head_param_count(),
        horizons,
        rmse: rmse(&all_y, &all_p)?,
        mae: mae(&all_y, &all_p)?,
        rmse_celsius: rmse_c,
        mae_celsius: mae(&all_yc, &all_pc)?,
        persistence_rmse_celsius: pers,
        improvement_over_persistence: (pers - rmse_c) / pers,
    })
}

/// Side-by-side reports; `improvement` compares each model's °C RMSE with
/// the first (reference) model as `(ref − model) / ref`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub reports: Vec<EvalReport>,
    pub improvement_vs_first: Vec<f64>,
}

pub fn compare_models(reports: Vec<EvalReport>) -> Result<Comparison> {
    let first = reports
        .first()
        .ok_or_else(|| Error::Insufficient("nothing to compare".into()))?;
    if reports.iter().any(|r| r.n_test != first.n_test) {
        return Err(Error::Domain("reports cover different test sets".into()));
    }
    let reference = first.rmse_celsius;
    let improvement_vs_first = reports
        .iter()
        .map(|r| if reference > 0.0 { (reference - r.rmse_celsius) / reference } else { 0.0 })
        .collect();
    Ok(Comparison {
        reports,
        improvement_vs_first,
    })
}

impl Comparison {
    /// `model,horizon_minutes,rmse_c,mae_c,rmse,mae` rows, aggregate rows
    /// labelled `all`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("model,horizon,rmse_celsius,mae_celsius,rmse,mae\n");
        for r in &self.reports {
            for h in &r.horizons {
                s.push_str(&format!(
                    "{},{},{:.6},{:.6},{:.6},{:.6}\n",
                    r.model, h.minutes, h.rmse_celsius, h.mae_celsius, h.rmse, h.mae
                ));
            }
            s.push_str(&format!(
                "{},all,{:.6},{:.6},{:.6},{:.6}\n",
                r.model, r.rmse_celsius, r.mae_celsius, r.rmse, r.mae
            ));
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}
