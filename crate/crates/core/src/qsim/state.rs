use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on `Σ|a|² − 1` before an expectation value is refused.
pub const NORM_TOLERANCE: f64 = 1e-8;

/// Pure state of `n` qubits as `2^n` complex amplitudes.
///
/// Qubit ordering is little-endian: qubit `q` is bit `q` of the amplitude
/// index, so `|10⟩` written as (qubit1, qubit0) = (1, 0) is index 2.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl QuantumState {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::Domain(format!("basis index {index} >= {dim}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let n = amps.len().trailing_zeros() as usize;
        if amps.is_empty() || 1usize << n != amps.len() {
            return Err(Error::Domain(format!(
                "amplitude count {} is not a power of two",
                amps.len()
            )));
        }
        Ok(Self { n_qubits: n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::QubitRange {
                index: q,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    /// Applies the 2×2 matrix `[[m00, m01], [m10, m11]]` to qubit `q`.
    fn apply_single(&mut self, q: usize, m: [[Complex64; 2]; 2]) -> Result<()> {
        self.check_qubit(q)?;
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit != 0 {
                continue;
            }
            let (a0, a1) = (self.amps[i], self.amps[i | bit]);
            self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
            self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
        }
        Ok(())
    }

    /// `Rx(θ) = [[cos θ/2, −i sin θ/2], [−i sin θ/2, cos θ/2]]`.
    pub fn apply_rx(&mut self, q: usize, theta: f64) -> Result<()> {
        let (s, c) = (theta / 2.0).sin_cos();
        let c = Complex64::new(c, 0.0);
        let mis = Complex64::new(0.0, -s);
        self.apply_single(q, [[c, mis], [mis, c]])
    }

    /// `Ry(θ) = [[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]]`.
    pub fn apply_ry(&mut self, q: usize, theta: f64) -> Result<()> {
        let (s, c) = (theta / 2.0).sin_cos();
        let c = Complex64::new(c, 0.0);
        let (s, ms) = (Complex64::new(s, 0.0), Complex64::new(-s, 0.0));
        self.apply_single(q, [[c, ms], [s, c]])
    }

    /// Flips `target` on every basis state whose `control` bit is set.
    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::SameQubit(control));
        }
        let (cb, tb) = (1usize << control, 1usize << target);
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
        Ok(())
    }

    /// `⟨Z_q⟩ = Σ ±|a_i|²`, `+` where bit `q` of `i` is 0.
    pub fn expectation_z(&self, q: usize) -> Result<f64> {
        self.check_qubit(q)?;
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Unnormalized(norm));
        }
        let bit = 1usize << q;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| if i & bit == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum())
    }
}
