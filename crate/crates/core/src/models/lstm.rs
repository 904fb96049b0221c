use crate::ad::{Graph, Tensor, Var};
use crate::error::{Error, Result};

/// Graph handles for one LSTM layer.
///
/// Gate blocks are laid out `[i | f | g | o]` along the `4H` axis of
/// `w_x [F × 4H]`, `w_h [H × 4H]` and `b [1 × 4H]`.
#[derive(Clone, Copy, Debug)]
pub struct LstmVars {
    pub w_x: Var,
    pub w_h: Var,
    pub b: Var,
}

pub fn lstm_param_count(input: usize, hidden: usize) -> usize {
    4 * (hidden * input + hidden * hidden + hidden)
}

/// Final hidden state `[B × H]` after running over `xs` (one `[B × F]`
/// node per time step) from zero state.
///
/// ```text
/// i = σ(z_i)  f = σ(z_f)  g = tanh(z_g)  o = σ(z_o),  z = x·W_x + h·W_h + b
/// c' = f ⊙ c + i ⊙ g      h' = o ⊙ tanh(c')
/// ```
pub fn lstm_forward(g: &mut Graph, p: LstmVars, xs: &[Var]) -> Result<Var> {
    if xs.is_empty() {
        return Err(Error::shape("lstm", "empty sequence"));
    }
    let (f_in, four_h) = g.value(p.w_x).dims2()?;
    let hidden = four_h / 4;
    if four_h % 4 != 0 || g.value(p.w_h).shape() != [hidden, four_h] {
        return Err(Error::shape("lstm", "inconsistent gate weight shapes"));
    }
    let mut h: Option<Var> = None;
    let mut c: Option<Var> = None;
    for &x in xs {
        let (_, w) = g.value(x).dims2()?;
        if w != f_in {
            return Err(Error::shape("lstm", format!("step width {w}, expected {f_in}")));
        }
        let mut z = g.matmul(x, p.w_x)?;
        if let Some(h) = h {
            let zh = g.matmul(h, p.w_h)?;
            z = g.add(z, zh)?;
        }
        let z = g.add_bias(z, p.b)?;
        let zi = g.slice_cols(z, 0, hidden)?;
        let zf = g.slice_cols(z, hidden, 2 * hidden)?;
        let zg = g.slice_cols(z, 2 * hidden, 3 * hidden)?;
        let zo = g.slice_cols(z, 3 * hidden, 4 * hidden)?;
        let i = g.sigmoid(zi)?;
        let gg = g.tanh(zg)?;
        let o = g.sigmoid(zo)?;
        let ig = g.mul(i, gg)?;
        let c_new = match c {
            Some(c) => {
                let f = g.sigmoid(zf)?;
                let fc = g.mul(f, c)?;
                g.add(fc, ig)?
            }
            None => ig,
        };
        let tc = g.tanh(c_new)?;
        h = Some(g.mul(o, tc)?);
        c = Some(c_new);
    }
    Ok(h.expect("non-empty sequence"))
}

/// Splits `samples` (each `[steps × F]`, row-major) into per-step `[B × F]`
/// tensors.
pub fn time_major(samples: &[&[f64]], steps: usize, features: usize) -> Result<Vec<Tensor>> {
    let b = samples.len();
    if samples.iter().any(|s| s.len() != steps * features) {
        return Err(Error::shape("time_major", "sample width mismatch"));
    }
    (0..steps)
        .map(|t| {
            let mut data = Vec::with_capacity(b * features);
            for s in samples {
                data.extend_from_slice(&s[t * features..(t + 1) * features]);
            }
            Tensor::new(vec![b, features], data)
        })
        .collect()
}
