use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        /// Reduction in summed squared error achieved by this split.
        gain: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// Least-squares regression tree; `x <= threshold` goes left.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
    pub max_depth: usize,
}

impl RegressionTree {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let mut k = 0;
        loop {
            match &self.nodes[k] {
                Node::Leaf { value } => return *value,
                Node::Split { feature, threshold, left, right, .. } => {
                    k = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Prediction for sample `i` of column-major data.
    pub fn predict_sample(&self, columns: &[Vec<f64>], i: usize) -> f64 {
        let mut k = 0;
        loop {
            match &self.nodes[k] {
                Node::Leaf { value } => return *value,
                Node::Split { feature, threshold, left, right, .. } => {
                    k = if columns[*feature][i] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], k: usize) -> usize {
            match &nodes[k] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn add_importance(&self, acc: &mut [f64]) {
        for n in &self.nodes {
            if let Node::Split { feature, gain, .. } = n {
                acc[*feature] += gain;
            }
        }
    }
}

/// Column-major design matrix with per-feature sample orderings computed
/// once and reused by every tree.
#[derive(Clone, Debug)]
pub struct Presorted {
    pub columns: Vec<Vec<f64>>,
    order: Vec<Vec<u32>>,
}

impl Presorted {
    pub fn new(columns: Vec<Vec<f64>>) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::shape("presort", "columns of unequal length"));
        }
        if columns.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("tree features"));
        }
        let order = columns
            .iter()
            .map(|c| {
                let mut idx: Vec<u32> = (0..n as u32).collect();
                idx.sort_by(|&a, &b| c[a as usize].total_cmp(&c[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect();
        Ok(Self { columns, order })
    }

    pub fn n_samples(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }
}

const GAIN_EPS: f64 = 1e-12;

#[derive(Clone, Copy)]
struct Best {
    gain: f64,
    feature: usize,
    threshold: f64,
}

/// Exact greedy fit, grown level by level. Ties in gain keep the earlier
/// candidate: lowest feature index, then lowest threshold.
pub fn fit_tree(data: &Presorted, y: &[f64], max_depth: usize) -> Result<RegressionTree> {
    let n = data.n_samples();
    if y.len() != n {
        return Err(Error::shape("fit_tree", format!("{} targets for {n} samples", y.len())));
    }
    if n == 0 {
        return Err(Error::Insufficient("tree needs at least one sample".into()));
    }
    let mut nodes = vec![Node::Leaf { value: mean(y) }];
    // Node id per sample; usize::MAX once a sample sits in a finished leaf.
    let mut node_of = vec![0usize; n];
    let mut frontier = vec![0usize];

    for _ in 0..max_depth {
        if frontier.is_empty() {
            break;
        }
        // Slot per frontier node.
        let mut slot = vec![usize::MAX; nodes.len()];
        for (s, &k) in frontier.iter().enumerate() {
            slot[k] = s;
        }
        let m = frontier.len();
        let mut total_sum = vec![0.0; m];
        let mut total_cnt = vec![0usize; m];
        let mut total_sq = vec![0.0; m];
        for i in 0..n {
            if let Some(&s) = slot.get(node_of[i]).filter(|&&s| s != usize::MAX) {
                total_sum[s] += y[i];
                total_cnt[s] += 1;
                total_sq[s] += y[i] * y[i];
            }
        }
        // Gains below this are rounding noise, not structure.
        let floor: Vec<f64> = total_sq.iter().map(|q| GAIN_EPS * q.max(1.0)).collect();
        let mut best: Vec<Option<Best>> = vec![None; m];
        let mut lsum = vec![0.0; m];
        let mut lcnt = vec![0usize; m];
        let mut last = vec![f64::NAN; m];
        for f in 0..data.n_features() {
            lsum.fill(0.0);
            lcnt.fill(0);
            last.fill(f64::NAN);
            let col = &data.columns[f];
            for &i in &data.order[f] {
                let i = i as usize;
                let s = match slot.get(node_of[i]) {
                    Some(&s) if s != usize::MAX => s,
                    _ => continue,
                };
                let v = col[i];
                if lcnt[s] > 0 && v > last[s] {
                    let (nl, nr) = (lcnt[s] as f64, (total_cnt[s] - lcnt[s]) as f64);
                    let (sl, sr) = (lsum[s], total_sum[s] - lsum[s]);
                    let st = total_sum[s];
                    let gain = sl * sl / nl + sr * sr / nr - st * st / total_cnt[s] as f64;
                    if gain > best[s].map_or(floor[s], |b| b.gain) {
                        let mut threshold = 0.5 * (last[s] + v);
                        if threshold >= v {
                            threshold = last[s];
                        }
                        best[s] = Some(Best { gain, feature: f, threshold });
                    }
                }
                lsum[s] += y[i];
                lcnt[s] += 1;
                last[s] = v;
            }
        }
        let mut next = Vec::new();
        let mut child_of = vec![(0usize, 0usize); m];
        for (s, &k) in frontier.iter().enumerate() {
            if let Some(b) = best[s] {
                let left = nodes.len();
                let right = left + 1;
                nodes.push(Node::Leaf { value: 0.0 });
                nodes.push(Node::Leaf { value: 0.0 });
                nodes[k] = Node::Split {
                    feature: b.feature,
                    threshold: b.threshold,
                    gain: b.gain,
                    left,
                    right,
                };
                child_of[s] = (left, right);
                next.push(left);
                next.push(right);
            }
        }
        let mut sums = vec![0.0; nodes.len()];
        let mut cnts = vec![0usize; nodes.len()];
        for i in 0..n {
            let s = match slot.get(node_of[i]) {
                Some(&s) if s != usize::MAX => s,
                _ => continue,
            };
            match best[s] {
                Some(b) => {
                    let (l, r) = child_of[s];
                    let c = if data.columns[b.feature][i] <= b.threshold { l } else { r };
                    node_of[i] = c;
                    sums[c] += y[i];
                    cnts[c] += 1;
                }
                None => node_of[i] = usize::MAX,
            }
        }
        for &c in &next {
            nodes[c] = Node::Leaf { value: sums[c] / cnts[c] as f64 };
        }
        frontier = next;
    }
    Ok(RegressionTree { nodes, max_depth })
}

fn mean(y: &[f64]) -> f64 {
    y.iter().sum::<f64>() / y.len() as f64
}
