use crate::error::{Error, Result};

fn check(y: &[f64], y_hat: &[f64]) -> Result<()> {
    if y.is_empty() {
        return Err(Error::Insufficient("metric of empty series".into()));
    }
    if y.len() != y_hat.len() {
        return Err(Error::shape("metric", format!("{} targets vs {} predictions", y.len(), y_hat.len())));
    }
    Ok(())
}

/// `sqrt(mean((y − ŷ)²))`.
pub fn rmse(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    check(y, y_hat)?;
    let s: f64 = y.iter().zip(y_hat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((s / y.len() as f64).sqrt())
}

/// `mean(|y − ŷ|)`.
pub fn mae(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    check(y, y_hat)?;
    let s: f64 = y.iter().zip(y_hat).map(|(a, b)| (a - b).abs()).sum();
    Ok(s / y.len() as f64)
}
