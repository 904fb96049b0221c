//! Define-by-run computation graph with reverse-mode accumulation.
//!
//! Every operation appends a node holding its value and the recipe for
//! pushing an adjoint back to its parents. Node creation order is a valid
//! topological order, so the backward pass is a single reverse sweep.
//!
//! ```
//! use furnace_core::ad::{Graph, Tensor};
//!
//! let mut g = Graph::new();
//! let x = g.param(Tensor::scalar(3.0));
//! let y = g.mul(x, x).unwrap();
//! let grads = g.backward(y).unwrap();
//! assert_eq!(grads.get(x).unwrap().data(), &[6.0]);
//! ```

use super::tensor::{gemm, Tensor};
use crate::error::{Error, Result};

/// Handle to a node of a [`Graph`]. Only meaningful for the graph that
/// created it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Backward rule for a custom node: receives the node's adjoint and
/// returns one adjoint per parent (`None` where no gradient flows).
pub type CustomBackward = Box<dyn Fn(&Tensor) -> Vec<Option<Tensor>>>;

enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    AddBias(Var, Var),
    Scale(Var, f64),
    Tanh(Var),
    Sigmoid(Var),
    Relu(Var),
    Abs(Var),
    SliceCols(Var, usize, usize),
    SliceRows(Var, usize, usize),
    Reshape(Var),
    Transpose(Var),
    Sum(Var),
    L2Loss(Var, Var),
    L1Loss(Var, Var),
    Custom(Vec<Var>, CustomBackward),
}

struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

#[derive(Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

/// Adjoints produced by [`Graph::backward`].
pub struct Gradients {
    adjoints: Vec<Option<Tensor>>,
}

impl Gradients {
    /// Adjoint of `v`; every requires-grad leaf has one (zeros when the
    /// root does not depend on it).
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.adjoints.get(v.0).and_then(Option::as_ref)
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn sign0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Sum of an adjoint down to a single element (scalar broadcast).
fn reduce_to_scalar(adj: &Tensor, like: &Tensor) -> Tensor {
    Tensor::new(like.shape().to_vec(), vec![adj.sum()]).expect("scalar shape")
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Constant input; no adjoint is tracked for it.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, false)
    }

    /// Trainable leaf; receives an adjoint on backward.
    pub fn param(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, true)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn push_checked(
        &mut self,
        name: &'static str,
        value: Tensor,
        op: Op,
        parents: &[Var],
    ) -> Result<Var> {
        if !value.all_finite() {
            return Err(Error::NonFinite(name));
        }
        let rg = parents.iter().any(|p| self.nodes[p.0].requires_grad);
        Ok(self.push(value, op, rg))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (m, k) = self.value(a).dims2()?;
        let (k2, n) = self.value(b).dims2()?;
        if k != k2 {
            return Err(Error::shape("matmul", format!("[{m}x{k}] x [{k2}x{n}]")));
        }
        let mut out = vec![0.0; m * n];
        gemm(
            self.value(a).data(),
            (m, k),
            false,
            self.value(b).data(),
            n,
            false,
            &mut out,
            0.0,
        );
        let value = Tensor::new(vec![m, n], out)?;
        self.push_checked("matmul", value, Op::MatMul(a, b), &[a, b])
    }

    fn binary(
        &mut self,
        name: &'static str,
        a: Var,
        b: Var,
        f: fn(f64, f64) -> f64,
        op: Op,
    ) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        let value = if ta.shape() == tb.shape() {
            ta.zip_map(tb, f)
        } else if tb.is_scalar() {
            let s = tb.data()[0];
            ta.map(|x| f(x, s))
        } else if ta.is_scalar() {
            let s = ta.data()[0];
            tb.map(|x| f(s, x))
        } else {
            return Err(Error::shape(
                name,
                format!("{:?} vs {:?}", ta.shape(), tb.shape()),
            ));
        };
        self.push_checked(name, value, op, &[a, b])
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary("add", a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary("sub", a, b, |x, y| x - y, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary("mul", a, b, |x, y| x * y, Op::Mul(a, b))
    }

    /// `a[m×n] + bias[1×n]`, bias broadcast over rows.
    pub fn add_bias(&mut self, a: Var, bias: Var) -> Result<Var> {
        let (m, n) = self.value(a).dims2()?;
        let (br, bn) = self.value(bias).dims2()?;
        if br != 1 || bn != n {
            return Err(Error::shape(
                "add_bias",
                format!("[{m}x{n}] + [{br}x{bn}]"),
            ));
        }
        let b = self.value(bias).data();
        let mut out = self.value(a).data().to_vec();
        for row in out.chunks_mut(n) {
            for (x, bb) in row.iter_mut().zip(b) {
                *x += bb;
            }
        }
        let value = Tensor::new(self.value(a).shape().to_vec(), out)?;
        self.push_checked("add_bias", value, Op::AddBias(a, bias), &[a, bias])
    }

    pub fn scale(&mut self, a: Var, k: f64) -> Result<Var> {
        let value = self.value(a).map(|x| k * x);
        self.push_checked("scale", value, Op::Scale(a, k), &[a])
    }

    pub fn tanh(&mut self, a: Var) -> Result<Var> {
        let value = self.value(a).map(f64::tanh);
        self.push_checked("tanh", value, Op::Tanh(a), &[a])
    }

    pub fn sigmoid(&mut self, a: Var) -> Result<Var> {
        let value = self.value(a).map(sigmoid);
        self.push_checked("sigmoid", value, Op::Sigmoid(a), &[a])
    }

    pub fn relu(&mut self, a: Var) -> Result<Var> {
        let value = self.value(a).map(|x| x.max(0.0));
        self.push_checked("relu", value, Op::Relu(a), &[a])
    }

    pub fn abs(&mut self, a: Var) -> Result<Var> {
        let value = self.value(a).map(f64::abs);
        self.push_checked("abs", value, Op::Abs(a), &[a])
    }

    /// Columns `start..end` of a matrix.
    pub fn slice_cols(&mut self, a: Var, start: usize, end: usize) -> Result<Var> {
        let (m, n) = self.value(a).dims2()?;
        if start > end || end > n {
            return Err(Error::shape(
                "slice_cols",
                format!("range {start}..{end} out of {n} columns"),
            ));
        }
        let src = self.value(a).data();
        let w = end - start;
        let mut out = Vec::with_capacity(m * w);
        for r in 0..m {
            out.extend_from_slice(&src[r * n + start..r * n + end]);
        }
        let value = Tensor::new(vec![m, w], out)?;
        self.push_checked("slice_cols", value, Op::SliceCols(a, start, end), &[a])
    }

    pub fn slice_rows(&mut self, a: Var, start: usize, end: usize) -> Result<Var> {
        let value = self.value(a).slice_rows(start, end)?;
        self.push_checked("slice_rows", value, Op::SliceRows(a, start, end), &[a])
    }

    pub fn reshape(&mut self, a: Var, shape: &[usize]) -> Result<Var> {
        let value = self.value(a).reshape(shape.to_vec())?;
        self.push_checked("reshape", value, Op::Reshape(a), &[a])
    }

    pub fn transpose(&mut self, a: Var) -> Result<Var> {
        let value = self.value(a).transpose()?;
        self.push_checked("transpose", value, Op::Transpose(a), &[a])
    }

    pub fn sum(&mut self, a: Var) -> Result<Var> {
        let value = Tensor::scalar(self.value(a).sum());
        self.push_checked("sum", value, Op::Sum(a), &[a])
    }

    fn check_same(&self, name: &'static str, a: Var, b: Var) -> Result<()> {
        let (sa, sb) = (self.value(a).shape(), self.value(b).shape());
        if sa != sb {
            return Err(Error::shape(name, format!("{sa:?} vs {sb:?}")));
        }
        Ok(())
    }

    /// Mean squared difference, `(1/N) Σ (pred − target)²`.
    pub fn l2_loss(&mut self, pred: Var, target: Var) -> Result<Var> {
        self.check_same("l2_loss", pred, target)?;
        let (p, t) = (self.value(pred), self.value(target));
        let n = p.numel().max(1) as f64;
        let s: f64 = p
            .data()
            .iter()
            .zip(t.data())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let value = Tensor::scalar(s / n);
        self.push_checked("l2_loss", value, Op::L2Loss(pred, target), &[pred, target])
    }

    /// Sum of absolute differences; the subgradient at a zero difference is 0.
    pub fn l1_loss(&mut self, pred: Var, target: Var) -> Result<Var> {
        self.check_same("l1_loss", pred, target)?;
        let (p, t) = (self.value(pred), self.value(target));
        let s: f64 = p.data().iter().zip(t.data()).map(|(a, b)| (a - b).abs()).sum();
        let value = Tensor::scalar(s);
        self.push_checked("l1_loss", value, Op::L1Loss(pred, target), &[pred, target])
    }

    /// Node with an externally supplied value and backward rule.
    pub fn custom(
        &mut self,
        name: &'static str,
        parents: Vec<Var>,
        value: Tensor,
        backward: CustomBackward,
    ) -> Result<Var> {
        let ps = parents.clone();
        self.push_checked(name, value, Op::Custom(parents, backward), &ps)
    }

    /// Reverse sweep from a scalar root.
    pub fn backward(&self, root: Var) -> Result<Gradients> {
        let rv = self.value(root);
        if !rv.is_scalar() {
            return Err(Error::NonScalarRoot(rv.shape().to_vec()));
        }
        let mut adj: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        adj[root.0] = Some(Tensor::new(rv.shape().to_vec(), vec![1.0])?);

        for i in (0..=root.0).rev() {
            let node = &self.nodes[i];
            if !node.requires_grad {
                continue;
            }
            let Some(g) = adj[i].take() else { continue };
            self.propagate(node, &g, &mut adj);
            adj[i] = Some(g);
        }

        for (i, node) in self.nodes.iter().enumerate() {
            if matches!(node.op, Op::Leaf) && node.requires_grad && adj[i].is_none() {
                adj[i] = Some(Tensor::zeros(node.value.shape()));
            }
        }
        Ok(Gradients { adjoints: adj })
    }

    fn accumulate(&self, adj: &mut [Option<Tensor>], v: Var, g: Tensor) {
        if !self.nodes[v.0].requires_grad {
            return;
        }
        match &mut adj[v.0] {
            Some(existing) => existing.add_assign(&g),
            slot @ None => *slot = Some(g),
        }
    }

    fn wants(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn propagate(&self, node: &Node, g: &Tensor, adj: &mut [Option<Tensor>]) {
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (ta, tb) = (self.value(*a), self.value(*b));
                let (m, k) = ta.dims2().expect("checked");
                let n = tb.cols();
                if self.wants(*a) {
                    // dA = G · Bᵀ
                    let mut out = vec![0.0; m * k];
                    gemm(g.data(), (m, n), false, tb.data(), k, true, &mut out, 0.0);
                    let t = Tensor::new(ta.shape().to_vec(), out).expect("shape");
                    self.accumulate(adj, *a, t);
                }
                if self.wants(*b) {
                    // dB = Aᵀ · G
                    let mut out = vec![0.0; k * n];
                    gemm(ta.data(), (k, m), true, g.data(), n, false, &mut out, 0.0);
                    let t = Tensor::new(tb.shape().to_vec(), out).expect("shape");
                    self.accumulate(adj, *b, t);
                }
            }
            Op::Add(a, b) | Op::Sub(a, b) => {
                let sign = if matches!(node.op, Op::Sub(..)) { -1.0 } else { 1.0 };
                let (ta, tb) = (self.value(*a), self.value(*b));
                if self.wants(*a) {
                    let ga = if ta.numel() == g.numel() {
                        g.reshape(ta.shape().to_vec()).expect("shape")
                    } else {
                        reduce_to_scalar(g, ta)
                    };
                    self.accumulate(adj, *a, ga);
                }
                if self.wants(*b) {
                    let gb = if tb.numel() == g.numel() {
                        g.map(|x| sign * x).reshape(tb.shape().to_vec()).expect("shape")
                    } else {
                        reduce_to_scalar(&g.map(|x| sign * x), tb)
                    };
                    self.accumulate(adj, *b, gb);
                }
            }
            Op::Mul(a, b) => {
                let (ta, tb) = (self.value(*a), self.value(*b));
                let grad_for = |other: &Tensor, me: &Tensor| -> Tensor {
                    let prod = if other.numel() == g.numel() {
                        g.zip_map(other, |x, y| x * y)
                    } else {
                        let s = other.data()[0];
                        g.map(|x| x * s)
                    };
                    if me.numel() == g.numel() {
                        prod.reshape(me.shape().to_vec()).expect("shape")
                    } else {
                        reduce_to_scalar(&prod, me)
                    }
                };
                if self.wants(*a) {
                    let t = grad_for(tb, ta);
                    self.accumulate(adj, *a, t);
                }
                if self.wants(*b) {
                    let t = grad_for(ta, tb);
                    self.accumulate(adj, *b, t);
                }
            }
            Op::AddBias(a, bias) => {
                if self.wants(*a) {
                    self.accumulate(adj, *a, g.clone());
                }
                if self.wants(*bias) {
                    let n = g.cols();
                    let mut col = vec![0.0; n];
                    for row in g.data().chunks(n) {
                        for (c, x) in col.iter_mut().zip(row) {
                            *c += x;
                        }
                    }
                    let shape = self.value(*bias).shape().to_vec();
                    self.accumulate(adj, *bias, Tensor::new(shape, col).expect("shape"));
                }
            }
            Op::Scale(a, k) => {
                let k = *k;
                self.accumulate(adj, *a, g.map(|x| k * x));
            }
            Op::Tanh(a) => {
                let t = g.zip_map(&node.value, |gi, y| gi * (1.0 - y * y));
                self.accumulate(adj, *a, t);
            }
            Op::Sigmoid(a) => {
                let t = g.zip_map(&node.value, |gi, y| gi * y * (1.0 - y));
                self.accumulate(adj, *a, t);
            }
            Op::Relu(a) => {
                let t = g.zip_map(self.value(*a), |gi, x| if x > 0.0 { gi } else { 0.0 });
                self.accumulate(adj, *a, t);
            }
            Op::Abs(a) => {
                let t = g.zip_map(self.value(*a), |gi, x| gi * sign0(x));
                self.accumulate(adj, *a, t);
            }
            Op::SliceCols(a, start, end) => {
                let (m, n) = self.value(*a).dims2().expect("checked");
                let w = end - start;
                let mut out = vec![0.0; m * n];
                for r in 0..m {
                    out[r * n + start..r * n + end].copy_from_slice(&g.data()[r * w..(r + 1) * w]);
                }
                let shape = self.value(*a).shape().to_vec();
                self.accumulate(adj, *a, Tensor::new(shape, out).expect("shape"));
            }
            Op::SliceRows(a, start, end) => {
                let (r, n) = self.value(*a).dims2().expect("checked");
                let mut out = vec![0.0; r * n];
                out[start * n..end * n].copy_from_slice(g.data());
                let shape = self.value(*a).shape().to_vec();
                self.accumulate(adj, *a, Tensor::new(shape, out).expect("shape"));
            }
            Op::Reshape(a) => {
                let shape = self.value(*a).shape().to_vec();
                self.accumulate(adj, *a, g.reshape(shape).expect("shape"));
            }
            Op::Transpose(a) => {
                let t = g.transpose().expect("rank 2");
                let shape = self.value(*a).shape().to_vec();
                self.accumulate(adj, *a, t.reshape(shape).expect("shape"));
            }
            Op::Sum(a) => {
                let s = g.data()[0];
                let t = Tensor::full(self.value(*a).shape(), s);
                self.accumulate(adj, *a, t);
            }
            Op::L2Loss(p, t) => {
                let s = g.data()[0];
                let (tp, tt) = (self.value(*p), self.value(*t));
                let n = tp.numel().max(1) as f64;
                let d = tp.zip_map(tt, |a, b| 2.0 * s * (a - b) / n);
                if self.wants(*t) {
                    self.accumulate(adj, *t, d.map(|x| -x));
                }
                if self.wants(*p) {
                    self.accumulate(adj, *p, d);
                }
            }
            Op::L1Loss(p, t) => {
                let s = g.data()[0];
                let (tp, tt) = (self.value(*p), self.value(*t));
                let d = tp.zip_map(tt, |a, b| s * sign0(a - b));
                if self.wants(*t) {
                    self.accumulate(adj, *t, d.map(|x| -x));
                }
                if self.wants(*p) {
                    self.accumulate(adj, *p, d);
                }
            }
            Op::Custom(parents, backward) => {
                let grads = backward(g);
                for (p, gp) in parents.iter().zip(grads) {
                    if let Some(gp) = gp {
                        self.accumulate(adj, *p, gp);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(shape: &[usize], v: &[f64]) -> Tensor {
        Tensor::new(shape.to_vec(), v.to_vec()).unwrap()
    }

    #[test]
    fn matmul_identity_and_hand_product() {
        let mut g = Graph::new();
        let a = g.constant(t(&[3, 2], &[1., 2., 3., 4., 5., 6.]));
        let i = g.constant(Tensor::identity(3));
        let p = g.matmul(i, a).unwrap();
        assert_eq!(g.value(p), g.value(a));

        let m = g.constant(t(&[2, 2], &[1., 2., 3., 4.]));
        let ones = g.constant(t(&[2, 1], &[1., 1.]));
        let r = g.matmul(m, ones).unwrap();
        assert_eq!(g.value(r).data(), &[3., 7.]);

        let z = g.constant(Tensor::zeros(&[2, 3]));
        let zp = g.matmul(z, a).unwrap();
        assert!(g.value(zp).data().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn matmul_shape_mismatch() {
        let mut g = Graph::new();
        let a = g.constant(Tensor::zeros(&[2, 3]));
        let b = g.constant(Tensor::zeros(&[2, 3]));
        assert!(matches!(g.matmul(a, b), Err(Error::Shape { .. })));
    }

    #[test]
    fn activations_at_zero() {
        let mut g = Graph::new();
        let x = g.param(Tensor::scalar(0.0));
        let s = g.sigmoid(x).unwrap();
        let th = g.tanh(x).unwrap();
        assert_eq!(g.value(s).data(), &[0.5]);
        assert_eq!(g.value(th).data(), &[0.0]);
        let grads = g.backward(s).unwrap();
        assert_eq!(grads.get(x).unwrap().data(), &[0.25]);
    }

    #[test]
    fn activations_stay_finite_on_wide_inputs() {
        let mut g = Graph::new();
        let xs: Vec<f64> = (-50..=50).map(f64::from).collect();
        let x = g.param(Tensor::row_vector(xs));
        let s = g.sigmoid(x).unwrap();
        let th = g.tanh(x).unwrap();
        assert!(g.value(s).all_finite() && g.value(th).all_finite());
        let y = g.add(s, th).unwrap();
        let root = g.sum(y).unwrap();
        assert!(g.backward(root).unwrap().get(x).unwrap().all_finite());
    }

    #[test]
    fn mismatched_elementwise_shapes() {
        let mut g = Graph::new();
        let a = g.constant(Tensor::zeros(&[2, 2]));
        let b = g.constant(Tensor::zeros(&[2, 3]));
        assert!(g.add(a, b).is_err());
        assert!(g.mul(a, b).is_err());
    }

    #[test]
    fn l2_loss_values_and_gradient() {
        let mut g = Graph::new();
        let p = g.param(t(&[2], &[1., 1.]));
        let z = g.constant(t(&[2], &[0., 0.]));
        let l = g.l2_loss(p, z).unwrap();
        assert_eq!(g.value(l).data(), &[1.0]);
        let same = g.l2_loss(p, p).unwrap();
        assert_eq!(g.value(same).data(), &[0.0]);

        // Mean convention: d/dp (1/N)(p-0)^2 at p=1, N=1 is 2.
        let mut g = Graph::new();
        let p = g.param(t(&[1], &[1.0]));
        let z = g.constant(t(&[1], &[0.0]));
        let l = g.l2_loss(p, z).unwrap();
        assert_eq!(g.backward(l).unwrap().get(p).unwrap().data(), &[2.0]);
    }

    #[test]
    fn l1_loss_values_and_zero_subgradient() {
        let mut g = Graph::new();
        let p = g.param(t(&[2], &[2., -1.]));
        let z = g.constant(t(&[2], &[0., 0.]));
        let l = g.l1_loss(p, z).unwrap();
        assert_eq!(g.value(l).data(), &[3.0]);

        let mut g = Graph::new();
        let p = g.param(t(&[2], &[0.5, 0.0]));
        let z = g.constant(t(&[2], &[0.5, 0.0]));
        let l = g.l1_loss(p, z).unwrap();
        assert_eq!(g.value(l).data(), &[0.0]);
        assert_eq!(g.backward(l).unwrap().get(p).unwrap().data(), &[0.0, 0.0]);
    }

    #[test]
    fn backward_simple_functions() {
        let mut g = Graph::new();
        let x = g.param(Tensor::scalar(3.0));
        let grads = g.backward(x).unwrap();
        assert_eq!(grads.get(x).unwrap().data(), &[1.0]);

        let y = g.mul(x, x).unwrap();
        assert_eq!(g.backward(y).unwrap().get(x).unwrap().data(), &[6.0]);
    }

    #[test]
    fn backward_rejects_non_scalar_root() {
        let mut g = Graph::new();
        let x = g.param(Tensor::zeros(&[2, 2]));
        assert!(matches!(g.backward(x), Err(Error::NonScalarRoot(_))));
    }

    #[test]
    fn unused_param_gets_zero_adjoint() {
        let mut g = Graph::new();
        let x = g.param(Tensor::scalar(1.0));
        let unused = g.param(Tensor::zeros(&[2, 3]));
        let grads = g.backward(x).unwrap();
        assert_eq!(grads.get(unused).unwrap().shape(), &[2, 3]);
    }

    #[test]
    fn non_finite_is_an_error() {
        let mut g = Graph::new();
        let x = g.constant(Tensor::scalar(f64::MAX));
        assert!(matches!(g.scale(x, 10.0), Err(Error::NonFinite("scale"))));
    }

    #[test]
    fn scalar_broadcast_gradients() {
        let mut g = Graph::new();
        let a = g.param(t(&[1, 3], &[1., 2., 3.]));
        let s = g.param(Tensor::scalar(2.0));
        let p = g.mul(a, s).unwrap();
        let root = g.sum(p).unwrap();
        let grads = g.backward(root).unwrap();
        assert_eq!(grads.get(s).unwrap().data(), &[6.0]);
        assert_eq!(grads.get(a).unwrap().data(), &[2., 2., 2.]);
    }
}
