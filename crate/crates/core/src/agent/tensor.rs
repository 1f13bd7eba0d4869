//! Dense row-major matrices and the few kernels the network needs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Tensor<S> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> Tensor<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn vector(n: usize) -> Self {
        Self::zeros(n, 1)
    }

    /// Uniform in `[-scale, scale]`.
    pub fn uniform(rows: usize, cols: usize, scale: f64, rng: &mut impl Rng) -> Self {
        let data = (0..rows * cols)
            .map(|_| S::lit(rng.gen_range(-scale..=scale)))
            .collect();
        Tensor { rows, cols, data }
    }

    /// Glorot-uniform initialization for a weight matrix.
    pub fn glorot(rows: usize, cols: usize, rng: &mut impl Rng) -> Self {
        let scale = (6.0 / (rows + cols) as f64).sqrt();
        Self::uniform(rows, cols, scale, rng)
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Self::zeros(n, n);
        for i in 0..n {
            t.data[i * n + i] = S::one();
        }
        t
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [S] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn fill_zero(&mut self) {
        self.data.iter_mut().for_each(|x| *x = S::zero());
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// `out = self * x`.
    pub fn matvec_into(&self, x: &[S], out: &mut [S]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (r, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(r), x);
        }
    }

    pub fn matvec(&self, x: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); self.rows];
        self.matvec_into(x, &mut out);
        out
    }

    /// `out += self^T * dy`.
    pub fn matvec_t_acc(&self, dy: &[S], out: &mut [S]) {
        debug_assert_eq!(dy.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (r, &g) in dy.iter().enumerate() {
            if g == S::zero() {
                continue;
            }
            axpy(g, self.row(r), out);
        }
    }

    /// `self += dy * x^T`.
    pub fn outer_acc(&mut self, dy: &[S], x: &[S]) {
        debug_assert_eq!(dy.len(), self.rows);
        debug_assert_eq!(x.len(), self.cols);
        for (r, &g) in dy.iter().enumerate() {
            if g == S::zero() {
                continue;
            }
            let cols = self.cols;
            axpy(g, x, &mut self.data[r * cols..(r + 1) * cols]);
        }
    }

    pub fn add_assign(&mut self, other: &[S]) {
        for (a, &b) in self.data.iter_mut().zip(other) {
            *a = *a + b;
        }
    }

    pub fn cast<T: Scalar>(&self) -> Tensor<T> {
        Tensor {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| T::lit(x.to_f64_lossy())).collect(),
        }
    }
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    debug_assert_eq!(a.len(), b.len());
    // Four accumulators let the compiler vectorize the reduction.
    let mut acc = [S::zero(); 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        for k in 0..4 {
            acc[k] = acc[k] + a[4 * i + k] * b[4 * i + k];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s = s + a[i] * b[i];
    }
    s
}

/// `y += g * x`.
pub fn axpy<S: Scalar>(g: S, x: &[S], y: &mut [S]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + g * xi;
    }
}

pub fn add_into<S: Scalar>(acc: &mut [S], x: &[S]) {
    for (a, &b) in acc.iter_mut().zip(x) {
        *a = *a + b;
    }
}

pub fn sigmoid<S: Scalar>(x: S) -> S {
    if x >= S::zero() {
        S::one() / (S::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (S::one() + e)
    }
}

/// Softmax restricted to `mask` (all entries when `None`); masked-out
/// entries get probability exactly zero.
pub fn masked_softmax<S: Scalar>(logits: &[S], mask: Option<&[bool]>) -> Vec<S> {
    let allowed = |i: usize| mask.is_none_or(|m| m[i]);
    let max = logits
        .iter()
        .enumerate()
        .filter(|(i, _)| allowed(*i))
        .map(|(_, &x)| x)
        .fold(S::neg_infinity(), S::max);
    let mut out: Vec<S> = logits
        .iter()
        .enumerate()
        .map(|(i, &x)| if allowed(i) { (x - max).exp() } else { S::zero() })
        .collect();
    let sum: S = out.iter().copied().sum();
    for p in &mut out {
        *p = *p / sum;
    }
    out
}

pub fn softmax<S: Scalar>(logits: &[S]) -> Vec<S> {
    masked_softmax(logits, None)
}

/// Shannon entropy (nats) of a distribution; zero-probability entries
/// contribute nothing.
pub fn entropy<S: Scalar>(p: &[S]) -> S {
    -p.iter()
        .filter(|&&x| x > S::zero())
        .map(|&x| x * x.ln())
        .sum::<S>()
}
