use std::path::Path;

use crate::dataio::PCI_CHANNEL;
use crate::error::{Error, Result};
use crate::fsutil::{read_to_string, write_atomic};
use crate::preprocess::{DiscretizedSeries, TEMPERATURE};

use super::{fit_gb, select_features, GbConfig, ImportanceReport};

#[derive(Clone, Debug, PartialEq)]
pub struct FeatselConfig {
    pub gb: GbConfig,
    pub n_t: usize,
    pub n_pci: usize,
    pub total: usize,
}

impl Default for FeatselConfig {
    fn default() -> Self {
        Self {
            gb: GbConfig::default(),
            n_t: 19,
            n_pci: 6,
            total: 25,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub report_t: ImportanceReport,
    pub report_pci: ImportanceReport,
    /// The `total` selected sensor channels.
    pub selected: Vec<String>,
}

impl Selection {
    /// Model feature order: selected channels, then PCI, then temperature.
    pub fn model_features(&self) -> Vec<String> {
        let mut f = self.selected.clone();
        f.push(PCI_CHANNEL.to_string());
        f.push(TEMPERATURE.to_string());
        f
    }
}

/// Fits one booster per target (temperature, PCI) over every other column.
pub fn run_selection(series: &DiscretizedSeries, cfg: &FeatselConfig) -> Result<Selection> {
    let t = series.require(TEMPERATURE)?;
    let p = series.require(PCI_CHANNEL)?;
    let (names, columns): (Vec<String>, Vec<Vec<f64>>) = series
        .names
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != t && *i != p)
        .map(|(i, n)| (n.clone(), series.column(i)))
        .unzip();
    let temp = series.column(t);
    let pci = series.column(p);
    let model_t = fit_gb(&columns, &temp, &cfg.gb)?;
    let model_p = fit_gb(&columns, &pci, &cfg.gb)?;
    let report_t = ImportanceReport::new(&model_t, &names, &columns, &temp)?;
    let report_pci = ImportanceReport::new(&model_p, &names, &columns, &temp)?;
    let selected = select_features(&report_t, &report_pci, cfg.n_t, cfg.n_pci, cfg.total)?;
    Ok(Selection {
        report_t,
        report_pci,
        selected,
    })
}

/// One feature name per line.
pub fn save_feature_list(names: &[String], path: impl AsRef<Path>) -> Result<()> {
    let mut s = names.join("\n");
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub fn load_feature_list(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let names: Vec<String> = read_to_string(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect();
    if names.is_empty() {
        return Err(Error::Parse { line: 1, msg: "empty feature list".into() });
    }
    Ok(names)
}
