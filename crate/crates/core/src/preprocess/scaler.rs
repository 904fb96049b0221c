use crate::dataio::is_missing;
use crate::error::{Error, Result};

/// Per-feature min-max scaling to `[0, 1]` over the fitting data.
///
/// Values outside the fitted range map outside `[0, 1]`; this is allowed.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MinMaxScaler {
    names: Vec<String>,
    min: Vec<f64>,
    max: Vec<f64>,
}

impl MinMaxScaler {
    /// Fits on column-major data, ignoring missing values.
    pub fn fit(names: &[String], columns: &[Vec<f64>]) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::shape("scaler", "names and columns differ in count"));
        }
        let mut min = Vec::with_capacity(columns.len());
        let mut max = Vec::with_capacity(columns.len());
        for (name, col) in names.iter().zip(columns) {
            let present = col.iter().copied().filter(|x| !is_missing(*x));
            let (lo, hi) = present.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                (lo.min(x), hi.max(x))
            });
            if lo > hi {
                return Err(Error::Insufficient(format!("feature {name} has no values")));
            }
            min.push(lo);
            max.push(hi);
        }
        Ok(Self {
            names: names.to_vec(),
            min,
            max,
        })
    }

    pub fn from_parts(names: Vec<String>, min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if names.len() != min.len() || min.len() != max.len() {
            return Err(Error::shape("scaler", "parts differ in length"));
        }
        Ok(Self { names, min, max })
    }

    pub fn is_fitted(&self) -> bool {
        !self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn min(&self, i: usize) -> f64 {
        self.min[i]
    }

    pub fn max(&self, i: usize) -> f64 {
        self.max[i]
    }

    pub fn range(&self, i: usize) -> f64 {
        self.max[i] - self.min[i]
    }

    /// Features with `max > min`; constant features are dropped downstream.
    pub fn retained(&self) -> Vec<usize> {
        (0..self.names.len()).filter(|&i| self.max[i] > self.min[i]).collect()
    }

    fn check(&self, i: usize) -> Result<()> {
        if !self.is_fitted() {
            return Err(Error::NotFitted("MinMaxScaler"));
        }
        if i >= self.names.len() {
            return Err(Error::shape("scaler", format!("feature {i} out of range")));
        }
        if !(self.max[i] > self.min[i]) {
            return Err(Error::Domain(format!("feature {} is constant", self.names[i])));
        }
        Ok(())
    }

    pub fn transform_value(&self, i: usize, x: f64) -> Result<f64> {
        self.check(i)?;
        Ok((x - self.min[i]) / (self.max[i] - self.min[i]))
    }

    pub fn inverse_value(&self, i: usize, y: f64) -> Result<f64> {
        self.check(i)?;
        Ok(self.min[i] + y * (self.max[i] - self.min[i]))
    }

    /// Restriction to the named features, in the given order.
    pub fn select(&self, names: &[String]) -> Result<Self> {
        let mut out = Self::default();
        for n in names {
            let i = self
                .index(n)
                .ok_or_else(|| Error::Domain(format!("feature {n} not in scaler")))?;
            out.names.push(n.clone());
            out.min.push(self.min[i]);
            out.max.push(self.max[i]);
        }
        Ok(out)
    }

    /// Scales row-major `[steps × features]` rows in place.
    pub fn transform_rows(&self, rows: &mut [Vec<f64>]) -> Result<()> {
        for row in rows.iter_mut() {
            if row.len() != self.names.len() {
                return Err(Error::shape("scaler", "row width differs from feature count"));
            }
            for (i, x) in row.iter_mut().enumerate() {
                *x = self.transform_value(i, *x)?;
            }
        }
        Ok(())
    }

    /// FNV-1a over names and exact bounds; identifies the unit system that
    /// scaled values live in.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for b in bytes {
                h ^= u64::from(*b);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        for ((n, lo), hi) in self.names.iter().zip(&self.min).zip(&self.max) {
            eat(n.as_bytes());
            eat(&lo.to_bits().to_le_bytes());
            eat(&hi.to_bits().to_le_bytes());
        }
        h
    }
}
