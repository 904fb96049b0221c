use std::path::Path;

use chrono::{DateTime, NaiveDateTime};

use crate::error::{Error, Result};
use crate::fsutil::write_atomic;

pub const TAP_COLUMNS: [&str; 4] = ["temp1", "temp2", "temp3", "temp4"];
pub const PCI_CHANNEL: &str = "pci";

/// Minute-cadence sensor log.
///
/// Missing cells are stored as NaN. Timestamps are minutes since the Unix
/// epoch and advance by exactly one per row; gaps in a source file become
/// explicit all-missing rows.
#[derive(Clone, Debug, PartialEq)]
pub struct SensorFrame {
    pub timestamps: Vec<i64>,
    pub channel_names: Vec<String>,
    /// Column-major: `channels[c][t]`.
    pub channels: Vec<Vec<f64>>,
    /// The four tap-hole temperatures, °C.
    pub tap_temps: [Vec<f64>; 4],
}

pub fn is_missing(x: f64) -> bool {
    x.is_nan()
}

impl SensorFrame {
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn channel_index(&self, name: &str) -> Option<usize> {
        self.channel_names.iter().position(|n| n == name)
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channel_index(name).map(|i| self.channels[i].as_slice())
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if self.channels.len() != self.channel_names.len() {
            return Err(Error::shape("frame", "channel name/column count mismatch"));
        }
        if self.channels.iter().any(|c| c.len() != n) || self.tap_temps.iter().any(|c| c.len() != n) {
            return Err(Error::shape("frame", "columns of unequal length"));
        }
        for w in self.timestamps.windows(2) {
            if w[1] != w[0] + 1 {
                return Err(Error::Domain(format!(
                    "timestamps must advance by one minute: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }

    /// Rows `start..end` as a new frame.
    pub fn slice(&self, start: usize, end: usize) -> SensorFrame {
        SensorFrame {
            timestamps: self.timestamps[start..end].to_vec(),
            channel_names: self.channel_names.clone(),
            channels: self.channels.iter().map(|c| c[start..end].to_vec()).collect(),
            tap_temps: std::array::from_fn(|k| self.tap_temps[k][start..end].to_vec()),
        }
    }
}

pub fn format_timestamp(minutes: i64) -> String {
    DateTime::from_timestamp(minutes * 60, 0)
        .map(|d| d.naive_utc().format("%Y-%m-%dT%H:%M").to_string())
        .unwrap_or_else(|| minutes.to_string())
}

pub fn parse_timestamp(s: &str) -> Option<i64> {
    let s = s.trim();
    for fmt in ["%Y-%m-%dT%H:%M", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M", "%Y-%m-%d %H:%M:%S"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            let secs = dt.and_utc().timestamp();
            return Some(secs.div_euclid(60));
        }
    }
    None
}

fn parse_cell(s: &str, zero_is_missing: bool, line: usize, col: &str) -> Result<f64> {
    let t = s.trim();
    if t.is_empty() || t.eq_ignore_ascii_case("null") || t.eq_ignore_ascii_case("nan") {
        return Ok(f64::NAN);
    }
    let v: f64 = t.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("column {col}: cannot parse {t:?} as a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("column {col}: non-finite value {t:?}"),
        });
    }
    Ok(if zero_is_missing && v == 0.0 { f64::NAN } else { v })
}

fn format_cell(v: f64) -> String {
    if is_missing(v) {
        String::new()
    } else {
        format!("{v}")
    }
}

/// Reads `timestamp,<channels...>,temp1,temp2,temp3,temp4`.
///
/// Empty and `null` cells are missing; a zero tap temperature is missing
/// too. Skipped minutes are filled with all-missing rows.
pub fn load_csv(path: impl AsRef<Path>) -> Result<SensorFrame> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file)
}

pub fn read_csv(reader: impl std::io::Read) -> Result<SensorFrame> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.len() < 5 || header[0] != "timestamp" {
        return Err(Error::Parse {
            line: 1,
            msg: "header must start with `timestamp` and end with temp1..temp4".into(),
        });
    }
    let n_cols = header.len();
    let tail = &header[n_cols - 4..];
    if tail != TAP_COLUMNS {
        return Err(Error::Parse {
            line: 1,
            msg: format!("last four columns must be {TAP_COLUMNS:?}, got {tail:?}"),
        });
    }
    let channel_names: Vec<String> = header[1..n_cols - 4].to_vec();
    let n_ch = channel_names.len();

    let mut frame = SensorFrame {
        timestamps: Vec::new(),
        channel_names,
        channels: vec![Vec::new(); n_ch],
        tap_temps: Default::default(),
    };

    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != n_cols {
            return Err(Error::Parse {
                line,
                msg: format!("expected {n_cols} fields, got {}", rec.len()),
            });
        }
        let ts = parse_timestamp(&rec[0]).ok_or_else(|| Error::Parse {
            line,
            msg: format!("bad timestamp {:?}", &rec[0]),
        })?;
        if let Some(&last) = frame.timestamps.last() {
            if ts == last {
                return Err(Error::Parse {
                    line,
                    msg: format!("duplicate timestamp {}", &rec[0]),
                });
            }
            if ts < last {
                return Err(Error::Parse {
                    line,
                    msg: format!("timestamp {} is out of order", &rec[0]),
                });
            }
            for gap in last + 1..ts {
                frame.timestamps.push(gap);
                frame.channels.iter_mut().for_each(|c| c.push(f64::NAN));
                frame.tap_temps.iter_mut().for_each(|c| c.push(f64::NAN));
            }
        }
        frame.timestamps.push(ts);
        for c in 0..n_ch {
            let v = parse_cell(&rec[c + 1], false, line, &frame.channel_names[c])?;
            frame.channels[c].push(v);
        }
        for k in 0..4 {
            let v = parse_cell(&rec[n_cols - 4 + k], true, line, TAP_COLUMNS[k])?;
            frame.tap_temps[k].push(v);
        }
    }
    Ok(frame)
}

pub fn write_csv(frame: &SensorFrame) -> Result<Vec<u8>> {
    frame.validate()?;
    let mut out = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let mut header = vec!["timestamp".to_string()];
        header.extend(frame.channel_names.iter().cloned());
        header.extend(TAP_COLUMNS.iter().map(|s| s.to_string()));
        w.write_record(&header).map_err(csv_err)?;
        let mut row = Vec::with_capacity(header.len());
        for t in 0..frame.len() {
            row.clear();
            row.push(format_timestamp(frame.timestamps[t]));
            row.extend(frame.channels.iter().map(|c| format_cell(c[t])));
            row.extend(frame.tap_temps.iter().map(|c| format_cell(c[t])));
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io("<csv buffer>", e))?;
    }
    Ok(out)
}

pub fn save_csv(frame: &SensorFrame, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, &write_csv(frame)?)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse {
        line: e.position().map_or(0, |p| p.line() as usize),
        msg: e.to_string(),
    }
}
