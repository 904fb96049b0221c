use crate::dataio::is_missing;
use crate::error::{Error, Result};

pub const DEFAULT_IQR_MULTIPLIER: f64 = 5.0;

/// Quantile by linear interpolation between closest ranks
/// (`h = (n − 1)·p`), ignoring missing values.
pub fn quantile(values: &[f64], p: f64) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !is_missing(*x)).collect();
    if v.is_empty() || !(0.0..=1.0).contains(&p) {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Some(v[lo] + (h - lo as f64) * (v[hi] - v[lo]))
}

/// Outlier fences `[q1 − k·iqr, q3 + k·iqr]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IqrBounds {
    pub q1: f64,
    pub q3: f64,
    pub multiplier: f64,
}

impl IqrBounds {
    pub fn from_quartiles(q1: f64, q3: f64, multiplier: f64) -> Result<Self> {
        if !(q1.is_finite() && q3.is_finite() && q1 <= q3 && multiplier > 0.0) {
            return Err(Error::Domain(format!(
                "invalid quartiles q1={q1}, q3={q3}, k={multiplier}"
            )));
        }
        Ok(Self { q1, q3, multiplier })
    }

    /// Quartiles of the non-missing values.
    pub fn fit(values: &[f64], multiplier: f64) -> Result<Self> {
        let q1 = quantile(values, 0.25)
            .ok_or_else(|| Error::Insufficient("no values to compute quartiles".into()))?;
        let q3 = quantile(values, 0.75).expect("non-empty");
        Self::from_quartiles(q1, q3, multiplier)
    }

    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }

    pub fn lower(&self) -> f64 {
        self.q1 - self.multiplier * self.iqr()
    }

    pub fn upper(&self) -> f64 {
        self.q3 + self.multiplier * self.iqr()
    }

    /// Clips to the violated fence; missing values pass through.
    pub fn clip(&self, x: f64) -> f64 {
        if is_missing(x) {
            x
        } else {
            x.clamp(self.lower(), self.upper())
        }
    }
}

pub fn iqr_correct(series: &[f64], bounds: &IqrBounds) -> Vec<f64> {
    series.iter().map(|&x| bounds.clip(x)).collect()
}
