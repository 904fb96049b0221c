//! Independent reference implementations shared by the oracle tests and
//! the acceptance suite. Nothing here calls into the code under test
//! except to obtain values to compare against.

#![allow(dead_code)]

use furnace_core::ad::{Graph, Tensor, Var};
use num_complex::Complex64;

pub type C = Complex64;

/// Dense `2^n × 2^n` matrix.
pub type Mat = Vec<Vec<C>>;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut out = vec![vec![c(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == c(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn eye2() -> Mat {
    vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]]
}

pub fn rx(theta: f64) -> Mat {
    let (s, co) = (theta / 2.0).sin_cos();
    vec![vec![c(co, 0.0), c(0.0, -s)], vec![c(0.0, -s), c(co, 0.0)]]
}

pub fn ry(theta: f64) -> Mat {
    let (s, co) = (theta / 2.0).sin_cos();
    vec![vec![c(co, 0.0), c(-s, 0.0)], vec![c(s, 0.0), c(co, 0.0)]]
}

pub fn pauli_z() -> Mat {
    vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]]
}

/// `gate` on qubit `q` of an `n`-qubit register, qubit 0 being the least
/// significant bit of the basis index: `I ⊗ … ⊗ gate ⊗ … ⊗ I` with the
/// highest qubit leftmost.
pub fn embed(gate: &Mat, q: usize, n: usize) -> Mat {
    let mut out: Mat = vec![vec![c(1.0, 0.0)]];
    for k in (0..n).rev() {
        let f = if k == q { gate.clone() } else { eye2() };
        out = kron(&out, &f);
    }
    out
}

/// CNOT as `|0⟩⟨0|_c ⊗ I + |1⟩⟨1|_c ⊗ X_t`, built by Kronecker products.
pub fn cnot(control: usize, target: usize, n: usize) -> Mat {
    let p0 = vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]];
    let p1 = vec![vec![c(0.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]];
    let x = vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]];
    let dim = 1 << n;
    let term = |ctrl: &Mat, tgt: Option<&Mat>| {
        let mut out: Mat = vec![vec![c(1.0, 0.0)]];
        for k in (0..n).rev() {
            let f = if k == control {
                ctrl.clone()
            } else if k == target {
                tgt.cloned().unwrap_or_else(eye2)
            } else {
                eye2()
            };
            out = kron(&out, &f);
        }
        out
    };
    let a = term(&p0, None);
    let b = term(&p1, Some(&x));
    (0..dim)
        .map(|i| (0..dim).map(|j| a[i][j] + b[i][j]).collect())
        .collect()
}

/// Whole-circuit unitary of the depth-infused layer, built gate by gate.
pub fn qdi_unitary(n: usize, depth: usize, inputs: &[f64], angles: &[f64]) -> Mat {
    let dim = 1 << n;
    let mut u: Mat = (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect())
        .collect();
    for b in 0..depth {
        for q in 0..n {
            u = matmul(&embed(&rx(inputs[b * n + q]), q, n), &u);
        }
        for q in 0..n {
            u = matmul(&embed(&ry(angles[b * n + q]), q, n), &u);
        }
        for q in 0..n {
            u = matmul(&cnot(q, (q + 1) % n, n), &u);
        }
    }
    u
}

/// `⟨Z_q⟩` readouts of `U|0…0⟩`.
pub fn qdi_oracle(n: usize, depth: usize, inputs: &[f64], angles: &[f64]) -> Vec<f64> {
    let u = qdi_unitary(n, depth, inputs, angles);
    let psi: Vec<C> = u.iter().map(|row| row[0]).collect();
    (0..n)
        .map(|q| {
            let z = embed(&pauli_z(), q, n);
            let mut e = c(0.0, 0.0);
            for i in 0..psi.len() {
                for j in 0..psi.len() {
                    e += psi[i].conj() * z[i][j] * psi[j];
                }
            }
            e.re
        })
        .collect()
}

/// `|a − b| / max(|a|, |b|, floor)`.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Central difference of `f` with respect to every entry of `x`.
pub fn central_diff(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut v = x.to_vec();
    (0..x.len())
        .map(|i| {
            let x0 = v[i];
            v[i] = x0 + h;
            let fp = f(&v);
            v[i] = x0 - h;
            let fm = f(&v);
            v[i] = x0;
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Builds a scalar graph from leaf values; the closure returns the root.
pub type Builder<'a> = dyn Fn(&mut Graph, &[Var]) -> Var + 'a;

/// Max relative error between reverse-mode gradients and central
/// differences, over every entry of every leaf.
pub fn graph_vs_fd(leaves: &[Tensor], build: &Builder<'_>, h: f64, floor: f64) -> f64 {
    let mut g = Graph::new();
    let vars: Vec<Var> = leaves.iter().map(|t| g.param(t.clone())).collect();
    let root = build(&mut g, &vars);
    let grads = g.backward(root).expect("scalar root");
    let eval = |ls: &[Tensor]| {
        let mut g = Graph::new();
        let vars: Vec<Var> = ls.iter().map(|t| g.constant(t.clone())).collect();
        let r = build(&mut g, &vars);
        g.value(r).data()[0]
    };
    let mut worst: f64 = 0.0;
    for (k, leaf) in leaves.iter().enumerate() {
        let analytic = grads.get(vars[k]).expect("leaf adjoint").data().to_vec();
        let fd = central_diff(leaf.data(), h, |x| {
            let mut ls = leaves.to_vec();
            ls[k] = Tensor::new(leaf.shape().to_vec(), x.to_vec()).unwrap();
            eval(&ls)
        });
        for (a, b) in analytic.iter().zip(&fd) {
            worst = worst.max(rel_err(*a, *b, floor));
        }
    }
    worst
}

/// Straightforward metric reimplementations.
pub fn naive_rmse(y: &[f64], p: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..y.len() {
        s += (y[i] - p[i]) * (y[i] - p[i]);
    }
    (s / y.len() as f64).sqrt()
}

pub fn naive_mae(y: &[f64], p: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..y.len() {
        s += (y[i] - p[i]).abs();
    }
    s / y.len() as f64
}

use furnace_core::models::{Model, ModelKind};
use furnace_core::qsim::QdiCircuit;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_tensor(r: &mut ChaCha8Rng, rows: usize, cols: usize, k: f64) -> Tensor {
    let d = (0..rows * cols).map(|_| r.random_range(-k..k)).collect();
    Tensor::new(vec![rows, cols], d).unwrap()
}

/// Reverse mode through a random composite of the engine's ops.
pub fn ad_ops_case(seed: u64) -> f64 {
    let mut r = rng(seed);
    let leaves = vec![
        rand_tensor(&mut r, 3, 4, 1.0),
        rand_tensor(&mut r, 4, 2, 1.0),
        rand_tensor(&mut r, 1, 2, 1.0),
        rand_tensor(&mut r, 3, 2, 1.0),
    ];
    let t1 = rand_tensor(&mut r, 3, 2, 1.0);
    let t2 = rand_tensor(&mut r, 2, 3, 1.0);
    let build = move |g: &mut Graph, v: &[Var]| {
        let ab = g.matmul(v[0], v[1]).unwrap();
        let y = g.add_bias(ab, v[2]).unwrap();
        let y = g.tanh(y).unwrap();
        let s = g.sigmoid(y).unwrap();
        let z = g.mul(s, v[3]).unwrap();
        let z = g.sub(z, y).unwrap();
        let rl = g.relu(z).unwrap();
        let sc = g.scale(rl, 1.7).unwrap();
        let tgt = g.constant(t1.clone());
        let l2 = g.l2_loss(sc, tgt).unwrap();
        let tr = g.transpose(z).unwrap();
        let tgt2 = g.constant(t2.clone());
        let l1 = g.l1_loss(tr, tgt2).unwrap();
        let col = g.slice_cols(v[0], 1, 3).unwrap();
        let row = g.slice_rows(col, 0, 2).unwrap();
        let flat = g.reshape(row, &[1, 4]).unwrap();
        let ab2 = g.abs(flat).unwrap();
        let sm = g.sum(ab2).unwrap();
        let a = g.add(l2, l1).unwrap();
        g.add(a, sm).unwrap()
    };
    graph_vs_fd(&leaves, &build, 1e-6, 1e-6)
}

/// Every parameter of a small hybrid forecaster (LSTM → dense → QDI →
/// dense → L2 loss) against central differences.
pub fn hybrid_case(seed: u64) -> f64 {
    let mut r = rng(seed ^ 0xabc);
    let (f, h, b) = (3, 4, 2);
    let model = Model::new(ModelKind::MtHybrid, f, h, seed).unwrap();
    let xs: Vec<Tensor> = (0..24).map(|_| rand_tensor(&mut r, b, f, 1.0)).collect();
    let target = rand_tensor(&mut r, b, 5, 1.0);
    let m = model.clone();
    let build = move |g: &mut Graph, v: &[Var]| {
        let x: Vec<Var> = xs.iter().map(|t| g.constant(t.clone())).collect();
        let y = m.forward(g, v, &x).unwrap();
        let t = g.constant(target.clone());
        g.l2_loss(y, t).unwrap()
    };
    graph_vs_fd(&model.params, &build, 1e-5, 1e-6)
}

/// Parameter-shift Jacobian against central differences of the circuit.
pub fn qdi_shift_case(seed: u64) -> f64 {
    let mut r = rng(seed ^ 0x51);
    let c = QdiCircuit::default();
    let n = c.slots();
    let inputs: Vec<f64> = (0..n).map(|_| r.random_range(-3.0..3.0)).collect();
    let angles: Vec<f64> = (0..n).map(|_| r.random_range(-3.0..3.0)).collect();
    let jac = c.gradients(&inputs, &angles).unwrap();
    let mut worst: f64 = 0.0;
    for o in 0..c.n_qubits {
        let fd_in = central_diff(&inputs, 1e-5, |x| c.forward(x, &angles).unwrap()[o]);
        let fd_an = central_diff(&angles, 1e-5, |a| c.forward(&inputs, a).unwrap()[o]);
        for i in 0..n {
            worst = worst.max(rel_err(jac.wrt_inputs.get(o, i), fd_in[i], 1e-4));
            worst = worst.max(rel_err(jac.wrt_angles.get(o, i), fd_an[i], 1e-4));
        }
    }
    worst
}

/// Max absolute readout difference between the simulator and the
/// Kronecker-product unitary.
pub fn kron_case(seed: u64) -> f64 {
    let mut r = rng(seed ^ 0x6b72);
    let c = QdiCircuit::default();
    let n = c.slots();
    let inputs: Vec<f64> = (0..n).map(|_| r.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
    let angles: Vec<f64> = (0..n).map(|_| r.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
    let sim = c.forward(&inputs, &angles).unwrap();
    let oracle = qdi_oracle(c.n_qubits, c.depth, &inputs, &angles);
    sim.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}
