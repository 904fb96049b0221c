use std::fmt;

use crate::error::{Error, Result};

/// Dense row-major array of `f64`.
///
/// Most of the engine works with rank-2 tensors (`[rows, cols]`); a rank-1
/// tensor of length `n` is treated as a `[1, n]` row where a matrix is
/// expected.
#[derive(Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let numel: usize = shape.iter().product();
        if numel != data.len() {
            return Err(Error::shape(
                "tensor",
                format!("shape {shape:?} needs {numel} values, got {}", data.len()),
            ));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self::full(shape, 0.0)
    }

    pub fn full(shape: &[usize], value: f64) -> Self {
        let n = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![value; n],
        }
    }

    pub fn scalar(value: f64) -> Self {
        Self {
            shape: vec![1],
            data: vec![value],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Self::zeros(&[n, n]);
        for i in 0..n {
            t.data[i * n + i] = 1.0;
        }
        t
    }

    /// Builds a `[rows, cols]` matrix from equal-length rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::shape("from_rows", "ragged rows"));
        }
        let data = rows.iter().flatten().copied().collect();
        Self::new(vec![rows.len(), cols], data)
    }

    pub fn row_vector(values: Vec<f64>) -> Self {
        Self {
            shape: vec![1, values.len()],
            data: values,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn is_scalar(&self) -> bool {
        self.data.len() == 1
    }

    /// `(rows, cols)` view of a rank-1 or rank-2 tensor.
    pub fn dims2(&self) -> Result<(usize, usize)> {
        match self.shape.as_slice() {
            [n] => Ok((1, *n)),
            [r, c] => Ok((*r, *c)),
            s => Err(Error::shape("dims2", format!("expected rank 1 or 2, got {s:?}"))),
        }
    }

    pub fn rows(&self) -> usize {
        self.dims2().map(|d| d.0).unwrap_or(0)
    }

    pub fn cols(&self) -> usize {
        self.dims2().map(|d| d.1).unwrap_or(0)
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols() + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        let cols = self.cols();
        self.data[r * cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let c = self.cols();
        &self.data[r * c..(r + 1) * c]
    }

    pub fn reshape(&self, shape: Vec<usize>) -> Result<Self> {
        Self::new(shape, self.data.clone())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.data.len(), other.data.len());
        Self {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> Result<Self> {
        let (r, c) = self.dims2()?;
        let mut out = vec![0.0; r * c];
        for i in 0..r {
            for j in 0..c {
                out[j * r + i] = self.data[i * c + j];
            }
        }
        Self::new(vec![c, r], out)
    }

    /// Rows `start..end` of a matrix.
    pub fn slice_rows(&self, start: usize, end: usize) -> Result<Self> {
        let (r, c) = self.dims2()?;
        if start > end || end > r {
            return Err(Error::shape(
                "slice_rows",
                format!("range {start}..{end} out of {r} rows"),
            ));
        }
        Self::new(vec![end - start, c], self.data[start * c..end * c].to_vec())
    }

    /// Vertical concatenation of matrices with equal column count.
    pub fn vstack(parts: &[&Tensor]) -> Result<Self> {
        let cols = parts.first().map_or(0, |t| t.cols());
        let mut data = Vec::new();
        let mut rows = 0;
        for p in parts {
            let (r, c) = p.dims2()?;
            if c != cols {
                return Err(Error::shape("vstack", format!("column count {c} != {cols}")));
            }
            rows += r;
            data.extend_from_slice(&p.data);
        }
        Self::new(vec![rows, cols], data)
    }
}

impl fmt::Debug for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tensor{:?}{:?}", self.shape, self.data)
    }
}

/// `c = a · b` for row-major matrices, with optional transposition of
/// either operand expressed through strides.
pub(crate) fn gemm(
    a: &[f64],
    (m, k): (usize, usize),
    a_trans: bool,
    b: &[f64],
    n: usize,
    b_trans: bool,
    c: &mut [f64],
    beta: f64,
) {
    // Row-major strides of the logical (possibly transposed) operands.
    let (rsa, csa) = if a_trans { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if b_trans { (1, k as isize) } else { (n as isize, 1) };
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        for x in c.iter_mut() {
            *x *= beta;
        }
        return;
    }
    if m == 1 {
        // Row vector times matrix: packing the matrix costs more than the
        // product, so stream it directly. `a` is contiguous either way.
        row_times(&a[..k], b, k, n, b_trans, c, beta);
        return;
    }
    // SAFETY: slices are sized by the caller for the given dimensions and
    // strides; matrixmultiply reads a/b and writes c within those bounds.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

fn row_times(a: &[f64], b: &[f64], k: usize, n: usize, b_trans: bool, c: &mut [f64], beta: f64) {
    let c = &mut c[..n];
    if beta == 0.0 {
        c.fill(0.0);
    } else {
        c.iter_mut().for_each(|x| *x *= beta);
    }
    if b_trans {
        // b stored [n × k].
        for (j, out) in c.iter_mut().enumerate() {
            let row = &b[j * k..(j + 1) * k];
            *out += row.iter().zip(a).map(|(x, y)| x * y).sum::<f64>();
        }
    } else {
        for (kk, &s) in a.iter().enumerate() {
            let row = &b[kk * n..(kk + 1) * n];
            for (out, x) in c.iter_mut().zip(row) {
                *out += s * x;
            }
        }
    }
}

/// Plain matrix product with shape checking, outside any graph.
pub fn matmul(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (m, k) = a.dims2()?;
    let (k2, n) = b.dims2()?;
    if k != k2 {
        return Err(Error::shape(
            "matmul",
            format!("[{m}x{k}] x [{k2}x{n}]"),
        ));
    }
    let mut out = vec![0.0; m * n];
    gemm(a.data(), (m, k), false, b.data(), n, false, &mut out, 0.0);
    Tensor::new(vec![m, n], out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_element_count() {
        assert!(Tensor::new(vec![2, 3], vec![0.0; 5]).is_err());
    }

    #[test]
    fn transpose_roundtrip() {
        let t = Tensor::new(vec![2, 3], vec![1., 2., 3., 4., 5., 6.]).unwrap();
        let tt = t.transpose().unwrap();
        assert_eq!(tt.shape(), &[3, 2]);
        assert_eq!(tt.get(2, 1), 6.0);
        assert_eq!(tt.transpose().unwrap(), t);
    }

    #[test]
    fn row_vector_path_matches_naive() {
        let (k, n) = (7, 5);
        let a: Vec<f64> = (0..k).map(|i| 0.3 * i as f64 - 1.0).collect();
        let b: Vec<f64> = (0..k * n).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
        let mut want = vec![0.0; n];
        for j in 0..n {
            for kk in 0..k {
                want[j] += a[kk] * b[kk * n + j];
            }
        }
        let mut c = vec![1.0; n];
        gemm(&a, (1, k), false, &b, n, false, &mut c, 0.0);
        for j in 0..n {
            assert!((c[j] - want[j]).abs() < 1e-12);
        }
        // Same product with b supplied transposed.
        let bt = Tensor::new(vec![k, n], b).unwrap().transpose().unwrap();
        let mut c = vec![1.0; n];
        gemm(&a, (1, k), false, bt.data(), n, true, &mut c, 1.0);
        for j in 0..n {
            assert!((c[j] - want[j] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gemm_transposed_operands() {
        // a^T (2x3)^T = 3x2 ; b^T
        let a = [1., 2., 3., 4., 5., 6.]; // 2x3, use as a^T: 3x2
        let b = [1., 0., 0., 1.]; // 2x2 identity
        let mut c = [0.0; 6];
        gemm(&a, (3, 2), true, &b, 2, false, &mut c, 0.0);
        assert_eq!(c, [1., 4., 2., 5., 3., 6.]);
    }
}
