//! The depth-infused variational layer: `depth` re-uploading blocks on a
//! small register, read out as per-qubit Pauli-Z expectations.
//!
//! Block `b` (for `b` in `0..depth`):
//! 1. `Rx(inputs[b·n + q])` on every qubit `q` (angle encoding, radians),
//! 2. `Ry(angles[b·n + q])` on every qubit `q` (trainable),
//! 3. CNOT ring `q → (q + 1) mod n`.
//!
//! Every input and angle drives exactly one rotation, so the parameter-shift
//! rule gives exact partials for both. The graph node uses an adjoint sweep
//! instead (one forward and one reverse pass per sample), which computes the
//! same vector-Jacobian product and is tested against parameter shift.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use super::state::QuantumState;
use crate::ad::{Graph, Tensor, Var};
use crate::error::{Error, Result};

pub const DEFAULT_QUBITS: usize = 6;
pub const DEFAULT_DEPTH: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QdiCircuit {
    pub n_qubits: usize,
    pub depth: usize,
}

impl Default for QdiCircuit {
    fn default() -> Self {
        Self {
            n_qubits: DEFAULT_QUBITS,
            depth: DEFAULT_DEPTH,
        }
    }
}

/// Partials of the `n_qubits` readouts, each a `[n_qubits × slots]`
/// row-major matrix (`[out][slot]`).
#[derive(Clone, Debug)]
pub struct QdiJacobian {
    pub wrt_inputs: Tensor,
    pub wrt_angles: Tensor,
}

impl QdiCircuit {
    pub fn new(n_qubits: usize, depth: usize) -> Result<Self> {
        if n_qubits < 2 || depth == 0 {
            return Err(Error::Config(format!(
                "QDI circuit needs >= 2 qubits and depth >= 1, got {n_qubits} x {depth}"
            )));
        }
        Ok(Self { n_qubits, depth })
    }

    /// Number of encoded inputs, equal to the number of trainable angles.
    pub fn slots(&self) -> usize {
        self.n_qubits * self.depth
    }

    fn check_lengths(&self, inputs: &[f64], angles: &[f64]) -> Result<()> {
        let n = self.slots();
        if inputs.len() != n || angles.len() != n {
            return Err(Error::shape(
                "qdi",
                format!(
                    "expected {n} inputs and {n} angles, got {} and {}",
                    inputs.len(),
                    angles.len()
                ),
            ));
        }
        Ok(())
    }

    /// Final state of the circuit from `|0…0⟩`.
    pub fn run(&self, inputs: &[f64], angles: &[f64]) -> Result<QuantumState> {
        self.check_lengths(inputs, angles)?;
        let n = self.n_qubits;
        let mut state = QuantumState::zero(n);
        for b in 0..self.depth {
            for q in 0..n {
                state.apply_rx(q, inputs[b * n + q])?;
            }
            for q in 0..n {
                state.apply_ry(q, angles[b * n + q])?;
            }
            for q in 0..n {
                state.apply_cnot(q, (q + 1) % n)?;
            }
        }
        Ok(state)
    }

    /// Z-expectation of every qubit after the circuit; values lie in `[−1, 1]`.
    pub fn forward(&self, inputs: &[f64], angles: &[f64]) -> Result<Vec<f64>> {
        let state = self.run(inputs, angles)?;
        (0..self.n_qubits).map(|q| state.expectation_z(q)).collect()
    }

    /// Exact partials by the parameter-shift rule
    /// `∂f/∂θ = [f(θ + π/2) − f(θ − π/2)] / 2`.
    pub fn gradients(&self, inputs: &[f64], angles: &[f64]) -> Result<QdiJacobian> {
        self.check_lengths(inputs, angles)?;
        let n = self.slots();
        let outs = self.n_qubits;
        let shifted = |vals: &[f64], i: usize, delta: f64| {
            let mut v = vals.to_vec();
            v[i] += delta;
            v
        };
        let mut d_in = vec![0.0; outs * n];
        let mut d_ang = vec![0.0; outs * n];
        for i in 0..n {
            let plus = self.forward(&shifted(inputs, i, FRAC_PI_2), angles)?;
            let minus = self.forward(&shifted(inputs, i, -FRAC_PI_2), angles)?;
            for o in 0..outs {
                d_in[o * n + i] = 0.5 * (plus[o] - minus[o]);
            }
            let plus = self.forward(inputs, &shifted(angles, i, FRAC_PI_2))?;
            let minus = self.forward(inputs, &shifted(angles, i, -FRAC_PI_2))?;
            for o in 0..outs {
                d_ang[o * n + i] = 0.5 * (plus[o] - minus[o]);
            }
        }
        Ok(QdiJacobian {
            wrt_inputs: Tensor::new(vec![outs, n], d_in)?,
            wrt_angles: Tensor::new(vec![outs, n], d_ang)?,
        })
    }

    /// `(∂(w·f)/∂inputs, ∂(w·f)/∂angles)` for readout weights `w`, by
    /// reverse sweep: with `λ = Σ w_q Z_q |ψ⟩`, the partial for a rotation
    /// `exp(−iθG/2)` is `Im⟨λ|G|ψ⟩` evaluated just after that gate.
    pub fn vjp(&self, inputs: &[f64], angles: &[f64], w: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.n_qubits;
        if w.len() != n {
            return Err(Error::shape("qdi_vjp", format!("{} readout weights for {n} qubits", w.len())));
        }
        let mut psi = self.run(inputs, angles)?;
        let lam_amps: Vec<Complex64> = psi
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let m: f64 = (0..n).map(|q| if i >> q & 1 == 0 { w[q] } else { -w[q] }).sum();
                a * m
            })
            .collect();
        let mut lam = QuantumState::from_amplitudes(lam_amps)?;
        let mut d_in = vec![0.0; self.slots()];
        let mut d_ang = vec![0.0; self.slots()];
        for b in (0..self.depth).rev() {
            for q in (0..n).rev() {
                psi.apply_cnot(q, (q + 1) % n)?;
                lam.apply_cnot(q, (q + 1) % n)?;
            }
            for q in (0..n).rev() {
                d_ang[b * n + q] = inner_y(&lam, &psi, q).im;
                psi.apply_ry(q, -angles[b * n + q])?;
                lam.apply_ry(q, -angles[b * n + q])?;
            }
            for q in (0..n).rev() {
                d_in[b * n + q] = inner_x(&lam, &psi, q).im;
                psi.apply_rx(q, -inputs[b * n + q])?;
                lam.apply_rx(q, -inputs[b * n + q])?;
            }
        }
        Ok((d_in, d_ang))
    }

    /// Graph node mapping `inputs [B × slots]` and `angles [1 × slots]` to
    /// readouts `[B × n_qubits]`, with parameter-shift adjoints.
    pub fn layer(&self, g: &mut Graph, inputs: Var, angles: Var) -> Result<Var> {
        let (batch, width) = g.value(inputs).dims2()?;
        let n = self.slots();
        if width != n || g.value(angles).numel() != n {
            return Err(Error::shape(
                "qdi_layer",
                format!(
                    "inputs [{batch}x{width}], angles {:?}, expected {n} slots",
                    g.value(angles).shape()
                ),
            ));
        }
        let angle_vals = g.value(angles).data().to_vec();
        let input_vals = g.value(inputs).data().to_vec();
        let outs = self.n_qubits;
        let mut value = Vec::with_capacity(batch * outs);
        for row in input_vals.chunks(n) {
            value.extend(self.forward(row, &angle_vals)?);
        }
        let value = Tensor::new(vec![batch, outs], value)?;
        let angle_shape = g.value(angles).shape().to_vec();
        let circuit = *self;
        let backward = Box::new(move |adj: &Tensor| {
            let mut d_in = Vec::with_capacity(batch * n);
            let mut d_ang = vec![0.0; n];
            for (b, row) in input_vals.chunks(n).enumerate() {
                let (di, da) = circuit
                    .vjp(row, &angle_vals, adj.row(b))
                    .expect("shapes validated in forward");
                d_in.extend(di);
                for (acc, v) in d_ang.iter_mut().zip(da) {
                    *acc += v;
                }
            }
            vec![
                Some(Tensor::new(vec![batch, n], d_in).expect("shape")),
                Some(Tensor::new(angle_shape.clone(), d_ang).expect("shape")),
            ]
        });
        g.custom("qdi_layer", vec![inputs, angles], value, backward)
    }
}

/// `⟨a|X_q|b⟩`.
fn inner_x(a: &QuantumState, b: &QuantumState, q: usize) -> Complex64 {
    let bit = 1usize << q;
    let (a, b) = (a.amplitudes(), b.amplitudes());
    (0..a.len()).map(|i| a[i].conj() * b[i ^ bit]).sum()
}

/// `⟨a|Y_q|b⟩` with `Y = [[0, −i], [i, 0]]`.
fn inner_y(a: &QuantumState, b: &QuantumState, q: usize) -> Complex64 {
    let bit = 1usize << q;
    let (a, b) = (a.amplitudes(), b.amplitudes());
    let i_unit = Complex64::new(0.0, 1.0);
    (0..a.len())
        .map(|i| {
            let yb = if i & bit == 0 { -i_unit * b[i | bit] } else { i_unit * b[i & !bit] };
            a[i].conj() * yb
        })
        .sum()
}
