use std::path::Path;

use crate::dataio::{format_timestamp, parse_timestamp};
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;

/// Window-mean series: `rows[step][feature]`.
///
/// `timestamps[step]` is the start minute of the window. Consecutive steps
/// are `l_window` minutes apart unless a long data gap split the source
/// into segments.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretizedSeries {
    pub l_window: usize,
    pub names: Vec<String>,
    pub timestamps: Vec<i64>,
    pub rows: Vec<Vec<f64>>,
}

impl DiscretizedSeries {
    pub fn steps(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.names.len()
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn require(&self, name: &str) -> Result<usize> {
        self.index(name)
            .ok_or_else(|| Error::Domain(format!("series has no column {name}")))
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[i]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.n_features()).map(|i| self.column(i)).collect()
    }

    /// Steps `a..=b` cover consecutive windows with no gap between them.
    pub fn is_contiguous(&self, a: usize, b: usize) -> bool {
        let span = (b - a) as i64 * self.l_window as i64;
        self.timestamps[b] - self.timestamps[a] == span
    }

    /// Same steps restricted to `names`, in that order.
    pub fn select(&self, names: &[String]) -> Result<Self> {
        let idx = names
            .iter()
            .map(|n| self.require(n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            l_window: self.l_window,
            names: names.to_vec(),
            timestamps: self.timestamps.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| idx.iter().map(|&i| r[i]).collect())
                .collect(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.timestamps.len() != self.rows.len() {
            return Err(Error::shape("series", "timestamp/row count mismatch"));
        }
        let width = self.names.len();
        for (i, r) in self.rows.iter().enumerate() {
            if r.len() != width {
                return Err(Error::shape("series", format!("row {i} has {} values", r.len())));
            }
            if r.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("discretized series"));
            }
        }
        for w in self.timestamps.windows(2) {
            if w[1] - w[0] < self.l_window as i64 {
                return Err(Error::Domain("discretized steps overlap or are out of order".into()));
            }
        }
        Ok(())
    }

    /// CSV with a `timestamp` column of window starts; `l_window` is
    /// recorded in the header comment line.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        self.validate()?;
        let mut out = format!("# l_window={}\n", self.l_window).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut out);
            let mut header = vec!["timestamp".to_string()];
            header.extend(self.names.iter().cloned());
            w.write_record(&header).map_err(csv_err)?;
            for (t, r) in self.timestamps.iter().zip(&self.rows) {
                let mut rec = vec![format_timestamp(*t)];
                rec.extend(r.iter().map(|x| format!("{x}")));
                w.write_record(&rec).map_err(csv_err)?;
            }
            w.flush().map_err(|e| Error::io("<csv buffer>", e))?;
        }
        Ok(out)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path, &self.to_csv()?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let first = text.lines().next().unwrap_or("");
        let l_window = first
            .strip_prefix("# l_window=")
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&l| l > 0)
            .ok_or_else(|| Error::Parse {
                line: 1,
                msg: "expected `# l_window=<minutes>` header".into(),
            })?;
        let body = &text[first.len()..];
        let mut rdr = csv::ReaderBuilder::new().from_reader(body.trim_start().as_bytes());
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Parse { line: 2, msg: e.to_string() })?
            .iter()
            .map(str::to_string)
            .collect();
        if header.first().map(String::as_str) != Some("timestamp") {
            return Err(Error::Parse {
                line: 2,
                msg: "first column must be `timestamp`".into(),
            });
        }
        let names = header[1..].to_vec();
        let mut s = Self {
            l_window,
            names,
            timestamps: Vec::new(),
            rows: Vec::new(),
        };
        for rec in rdr.records() {
            let rec = rec.map_err(csv_err)?;
            // +1 for the l_window comment line that the reader never saw.
            let line = rec.position().map_or(0, |p| p.line() as usize + 1);
            let ts = parse_timestamp(&rec[0]).ok_or_else(|| Error::Parse {
                line,
                msg: format!("bad timestamp {:?}", &rec[0]),
            })?;
            let row = rec
                .iter()
                .skip(1)
                .map(|c| {
                    c.trim().parse::<f64>().map_err(|_| Error::Parse {
                        line,
                        msg: format!("cannot parse {c:?}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            s.timestamps.push(ts);
            s.rows.push(row);
        }
        s.validate()?;
        Ok(s)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse {
        line: e.position().map_or(0, |p| p.line() as usize),
        msg: e.to_string(),
    }
}
