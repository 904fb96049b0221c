use crate::error::{Error, Result};

/// Non-overlapping window means: output `k` is the mean of
/// `series[k·l .. (k+1)·l]`; a trailing partial window is dropped.
pub fn discretize(series: &[f64], l_window: usize) -> Result<Vec<f64>> {
    if l_window == 0 {
        return Err(Error::Config("l_window must be positive".into()));
    }
    if series.len() < l_window {
        return Err(Error::Insufficient(format!(
            "series of length {} is shorter than one window ({l_window})",
            series.len()
        )));
    }
    Ok(series
        .chunks_exact(l_window)
        .map(|w| w.iter().sum::<f64>() / l_window as f64)
        .collect())
}
