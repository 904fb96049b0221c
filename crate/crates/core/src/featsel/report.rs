use std::path::Path;

use crate::error::{Error, Result};
use crate::fsutil::write_atomic;

use super::GbModel;

/// Per-feature influence (normalized to sum 100), Pearson correlation with
/// a reference series, and 1-based rank by influence.
#[derive(Clone, Debug, PartialEq)]
pub struct ImportanceReport {
    pub names: Vec<String>,
    pub influence: Vec<f64>,
    pub corr: Vec<f64>,
    pub rank: Vec<usize>,
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

impl ImportanceReport {
    pub fn new(
        model: &GbModel,
        names: &[String],
        columns: &[Vec<f64>],
        reference: &[f64],
    ) -> Result<Self> {
        if names.len() != model.n_features || columns.len() != model.n_features {
            return Err(Error::shape("importance", "feature count differs from model"));
        }
        let raw = model.raw_importance();
        let total: f64 = raw.iter().sum();
        let influence: Vec<f64> = if total > 0.0 {
            raw.iter().map(|v| 100.0 * v / total).collect()
        } else {
            vec![0.0; raw.len()]
        };
        let corr = columns.iter().map(|c| pearson(c, reference)).collect();
        let mut order: Vec<usize> = (0..raw.len()).collect();
        order.sort_by(|&a, &b| influence[b].total_cmp(&influence[a]).then(a.cmp(&b)));
        let mut rank = vec![0; raw.len()];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r + 1;
        }
        Ok(Self {
            names: names.to_vec(),
            influence,
            corr,
            rank,
        })
    }

    /// Feature names in rank order.
    pub fn ranked(&self) -> Vec<&str> {
        let mut idx: Vec<usize> = (0..self.names.len()).collect();
        idx.sort_by_key(|&i| self.rank[i]);
        idx.into_iter().map(|i| self.names[i].as_str()).collect()
    }

    /// `feature,influence,corr,rank`, rows in rank order.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("feature,influence,corr,rank\n");
        let mut idx: Vec<usize> = (0..self.names.len()).collect();
        idx.sort_by_key(|&i| self.rank[i]);
        for i in idx {
            s.push_str(&format!(
                "{},{:.6},{:.6},{}\n",
                self.names[i], self.influence[i], self.corr[i], self.rank[i]
            ));
        }
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path, self.to_csv().as_bytes())
    }
}

/// Top `n_t` by temperature influence, then PCI's top `n_pci` not already
/// chosen, then further temperature-ranked names until `total`.
pub fn select_features(
    report_t: &ImportanceReport,
    report_pci: &ImportanceReport,
    n_t: usize,
    n_pci: usize,
    total: usize,
) -> Result<Vec<String>> {
    if report_t.names != report_pci.names {
        return Err(Error::Domain("importance reports cover different features".into()));
    }
    if report_t.names.len() < total {
        return Err(Error::Insufficient(format!(
            "{} candidate features, need {total}",
            report_t.names.len()
        )));
    }
    let by_t = report_t.ranked();
    let by_pci = report_pci.ranked();
    let mut out: Vec<String> = Vec::with_capacity(total);
    let push = |name: &str, out: &mut Vec<String>| {
        if out.len() < total && !out.iter().any(|n| n == name) {
            out.push(name.to_string());
        }
    };
    for name in by_t.iter().take(n_t) {
        push(name, &mut out);
    }
    for name in by_pci.iter().take(n_pci) {
        push(name, &mut out);
    }
    for name in &by_t {
        push(name, &mut out);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(influence: Vec<f64>) -> ImportanceReport {
        let n = influence.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| influence[b].total_cmp(&influence[a]).then(a.cmp(&b)));
        let mut rank = vec![0; n];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r + 1;
        }
        ImportanceReport {
            names: (0..n).map(|i| format!("f{i}")).collect(),
            influence,
            corr: vec![0.0; n],
            rank,
        }
    }

    #[test]
    fn disjoint_and_overlapping_selection() {
        // Temperature prefers low indices, PCI prefers high ones.
        let t = report((0..30).map(|i| 30.0 - i as f64).collect());
        let p = report((0..30).map(|i| i as f64).collect());
        let sel = select_features(&t, &p, 19, 6, 25).unwrap();
        assert_eq!(sel.len(), 25);
        assert_eq!(sel[..19], (0..19).map(|i| format!("f{i}")).collect::<Vec<_>>()[..]);
        assert_eq!(sel[19], "f29");

        let sel = select_features(&t, &t, 19, 6, 25).unwrap();
        assert_eq!(sel, (0..25).map(|i| format!("f{i}")).collect::<Vec<_>>());
    }

    #[test]
    fn too_few_features() {
        let t = report(vec![1.0; 10]);
        assert!(select_features(&t, &t, 19, 6, 25).is_err());
    }

    #[test]
    fn pearson_examples() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]) - 1.0).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&[1.0, 1.0], &[1.0, 2.0]), 0.0);
    }
}
