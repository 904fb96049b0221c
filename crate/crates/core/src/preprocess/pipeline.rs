use std::path::Path;

use crate::dataio::{format_timestamp, SensorFrame, TAP_COLUMNS};
use crate::error::{Error, Result};
use crate::fsutil::{read_to_string, write_atomic};

use super::{
    complete_segments, discretize, impute, iqr_correct, DiscretizedSeries, ImputePolicy,
    IqrBounds, MinMaxScaler, DEFAULT_IQR_MULTIPLIER,
};

pub const TEMPERATURE: &str = "temperature";

#[derive(Clone, Debug, PartialEq)]
pub struct PreprocessConfig {
    pub l_window: usize,
    pub impute: ImputePolicy,
    pub iqr_multiplier: f64,
    /// Channels left out of IQR clipping.
    pub iqr_opt_out: Vec<String>,
    /// Leading fraction of the data treated as training for fitted
    /// statistics (IQR bounds, scaler).
    pub train_fraction: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            l_window: 10,
            impute: ImputePolicy::default(),
            iqr_multiplier: DEFAULT_IQR_MULTIPLIER,
            iqr_opt_out: Vec::new(),
            train_fraction: 0.8,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l_window == 0 {
            return Err(Error::Config("l_window must be positive".into()));
        }
        if !(self.iqr_multiplier > 0.0) {
            return Err(Error::Config("iqr_multiplier must be positive".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction <= 1.0) {
            return Err(Error::Config("train_fraction must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Fitted statistics needed to reproduce preprocessing at inference.
#[derive(Clone, Debug, PartialEq)]
pub struct Sidecar {
    pub l_window: usize,
    pub iqr_multiplier: f64,
    pub iqr: Vec<(String, IqrBounds)>,
    pub scaler: MinMaxScaler,
}

impl Sidecar {
    pub fn iqr_for(&self, name: &str) -> Option<&IqrBounds> {
        self.iqr.iter().find(|(n, _)| n == name).map(|(_, b)| b)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "# l_window={}\n# iqr_multiplier={}\nchannel,min,max,q1,q3\n",
            self.l_window, self.iqr_multiplier
        );
        let mut names: Vec<&str> = self.iqr.iter().map(|(n, _)| n.as_str()).collect();
        for n in self.scaler.names() {
            if !names.contains(&n.as_str()) {
                names.push(n);
            }
        }
        for n in names {
            let (lo, hi) = match self.scaler.index(n) {
                Some(i) => (self.scaler.min(i).to_string(), self.scaler.max(i).to_string()),
                None => (String::new(), String::new()),
            };
            let (q1, q3) = match self.iqr_for(n) {
                Some(b) => (b.q1.to_string(), b.q3.to_string()),
                None => (String::new(), String::new()),
            };
            s.push_str(&format!("{n},{lo},{hi},{q1},{q3}\n"));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut l_window = None;
        let mut multiplier = None;
        let mut header_seen = false;
        let mut iqr = Vec::new();
        let (mut names, mut min, mut max) = (Vec::new(), Vec::new(), Vec::new());
        for (k, line) in text.lines().enumerate() {
            let line_no = k + 1;
            let err = |msg: String| Error::Parse { line: line_no, msg };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(kv) = line.strip_prefix('#') {
                let (key, val) = kv
                    .split_once('=')
                    .ok_or_else(|| err(format!("expected key=value, got {kv:?}")))?;
                match key.trim() {
                    "l_window" => {
                        l_window = Some(val.trim().parse::<usize>().map_err(|e| err(e.to_string()))?)
                    }
                    "iqr_multiplier" => {
                        multiplier = Some(val.trim().parse::<f64>().map_err(|e| err(e.to_string()))?)
                    }
                    other => return Err(err(format!("unknown key {other}"))),
                }
                continue;
            }
            if !header_seen {
                if line != "channel,min,max,q1,q3" {
                    return Err(err("expected header channel,min,max,q1,q3".into()));
                }
                header_seen = true;
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 5 {
                return Err(err(format!("expected 5 fields, got {}", cells.len())));
            }
            let num = |s: &str| -> Result<Option<f64>> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse::<f64>().map(Some).map_err(|e| err(format!("{s:?}: {e}")))
                }
            };
            let name = cells[0].to_string();
            match (num(cells[1])?, num(cells[2])?) {
                (Some(lo), Some(hi)) => {
                    names.push(name.clone());
                    min.push(lo);
                    max.push(hi);
                }
                (None, None) => {}
                _ => return Err(err("min and max must both be set or both empty".into())),
            }
            match (num(cells[3])?, num(cells[4])?) {
                (Some(q1), Some(q3)) => {
                    let m = multiplier.ok_or_else(|| err("iqr_multiplier must precede rows".into()))?;
                    iqr.push((name, IqrBounds::from_quartiles(q1, q3, m)?));
                }
                (None, None) => {}
                _ => return Err(err("q1 and q3 must both be set or both empty".into())),
            }
        }
        Ok(Self {
            l_window: l_window.ok_or_else(|| Error::Parse { line: 0, msg: "missing l_window".into() })?,
            iqr_multiplier: multiplier.unwrap_or(DEFAULT_IQR_MULTIPLIER),
            iqr,
            scaler: MinMaxScaler::from_parts(names, min, max)?,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path, self.to_text().as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&read_to_string(path)?)
    }
}

/// Per-timestamp mean over the present tap temperatures.
pub fn assemble_temperature(taps: &[Vec<f64>; 4]) -> Vec<f64> {
    let n = taps[0].len();
    (0..n)
        .map(|t| {
            let (sum, count) = taps
                .iter()
                .map(|c| c[t])
                .filter(|x| !x.is_nan())
                .fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
            if count == 0 {
                f64::NAN
            } else {
                sum / count as f64
            }
        })
        .collect()
}

fn fit_and_clip(values: &[f64], n_train: usize, multiplier: f64) -> Result<(IqrBounds, Vec<f64>)> {
    let bounds = IqrBounds::fit(&values[..n_train], multiplier)?;
    Ok((bounds, iqr_correct(values, &bounds)))
}

/// Raw minute frame to a window-mean series in physical units, plus the
/// statistics fitted on its training portion.
///
/// Steps: IQR clipping (taps and channels), imputation, tap averaging into
/// `temperature`, per-segment discretization, scaler fit.
pub fn preprocess_frame(
    frame: &SensorFrame,
    cfg: &PreprocessConfig,
) -> Result<(DiscretizedSeries, Sidecar)> {
    cfg.validate()?;
    frame.validate()?;
    let n = frame.len();
    let n_train = ((n as f64) * cfg.train_fraction).floor() as usize;
    if n_train < cfg.l_window {
        return Err(Error::Insufficient(format!("{n} rows are too few to preprocess")));
    }

    let mut iqr = Vec::new();
    let mut taps: [Vec<f64>; 4] = Default::default();
    for k in 0..4 {
        let (b, clipped) = fit_and_clip(&frame.tap_temps[k], n_train, cfg.iqr_multiplier)?;
        iqr.push((TAP_COLUMNS[k].to_string(), b));
        taps[k] = impute(&clipped, cfg.impute);
    }
    let temperature = assemble_temperature(&taps);
    if let Some(t) = temperature.iter().position(|x| x.is_nan()) {
        return Err(Error::Domain(format!(
            "all tap temperatures missing beyond the imputation horizon at {}",
            format_timestamp(frame.timestamps[t])
        )));
    }

    let mut columns = Vec::with_capacity(frame.channels.len() + 1);
    for (name, col) in frame.channel_names.iter().zip(&frame.channels) {
        let col = if cfg.iqr_opt_out.contains(name) {
            col.clone()
        } else {
            let (b, clipped) = fit_and_clip(col, n_train, cfg.iqr_multiplier)?;
            iqr.push((name.clone(), b));
            clipped
        };
        columns.push(impute(&col, cfg.impute));
    }
    columns.push(temperature);
    let mut names = frame.channel_names.clone();
    names.push(TEMPERATURE.to_string());

    let refs: Vec<&[f64]> = columns.iter().map(Vec::as_slice).collect();
    let mut series = DiscretizedSeries {
        l_window: cfg.l_window,
        names,
        timestamps: Vec::new(),
        rows: Vec::new(),
    };
    for (a, b) in complete_segments(&refs) {
        if b - a < cfg.l_window {
            continue;
        }
        let disc = columns
            .iter()
            .map(|c| discretize(&c[a..b], cfg.l_window))
            .collect::<Result<Vec<_>>>()?;
        let steps = disc[0].len();
        for k in 0..steps {
            series
                .timestamps
                .push(frame.timestamps[a] + (k * cfg.l_window) as i64);
            series.rows.push(disc.iter().map(|d| d[k]).collect());
        }
    }
    if series.steps() == 0 {
        return Err(Error::Insufficient("no complete window after imputation".into()));
    }

    let fit_steps = ((series.steps() as f64) * cfg.train_fraction).floor().max(1.0) as usize;
    let fit_cols: Vec<Vec<f64>> = (0..series.n_features())
        .map(|i| series.rows[..fit_steps].iter().map(|r| r[i]).collect())
        .collect();
    let scaler = MinMaxScaler::fit(&series.names, &fit_cols)?;
    let sidecar = Sidecar {
        l_window: cfg.l_window,
        iqr_multiplier: cfg.iqr_multiplier,
        iqr,
        scaler,
    };
    Ok((series, sidecar))
}
