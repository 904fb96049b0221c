use crate::dataio::is_missing;

/// Gap-filling policy for minute series. Gaps up to `ffill_limit` minutes
/// are forward-filled, gaps up to `max_gap` are linearly interpolated, and
/// longer gaps stay missing (they split the series into segments).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImputePolicy {
    pub ffill_limit: usize,
    pub max_gap: usize,
}

impl Default for ImputePolicy {
    fn default() -> Self {
        Self {
            ffill_limit: 30,
            max_gap: 180,
        }
    }
}

/// Fills missing (NaN) runs per `policy`. Leading runs within
/// `ffill_limit` are back-filled from the first reading; trailing runs
/// within `ffill_limit` are forward-filled.
pub fn impute(values: &[f64], policy: ImputePolicy) -> Vec<f64> {
    let mut out = values.to_vec();
    let n = out.len();
    let mut i = 0;
    while i < n {
        if !is_missing(out[i]) {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && is_missing(out[i]) {
            i += 1;
        }
        let len = i - start;
        let before = start.checked_sub(1).map(|k| out[k]);
        let after = (i < n).then(|| out[i]);
        match (before, after) {
            (Some(b), Some(a)) => {
                if len <= policy.ffill_limit {
                    out[start..i].fill(b);
                } else if len <= policy.max_gap {
                    let span = (len + 1) as f64;
                    for (k, slot) in out[start..i].iter_mut().enumerate() {
                        let w = (k + 1) as f64 / span;
                        *slot = b + w * (a - b);
                    }
                }
            }
            (Some(b), None) if len <= policy.ffill_limit => out[start..i].fill(b),
            (None, Some(a)) if len <= policy.ffill_limit => out[start..i].fill(a),
            _ => {}
        }
    }
    out
}

/// Maximal runs `[start, end)` where every column is present.
pub fn complete_segments(columns: &[&[f64]]) -> Vec<(usize, usize)> {
    let n = columns.first().map_or(0, |c| c.len());
    let mut segs = Vec::new();
    let mut start = None;
    for t in 0..n {
        let ok = columns.iter().all(|c| !is_missing(c[t]));
        match (ok, start) {
            (true, None) => start = Some(t),
            (false, Some(s)) => {
                segs.push((s, t));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        segs.push((s, n));
    }
    segs
}
