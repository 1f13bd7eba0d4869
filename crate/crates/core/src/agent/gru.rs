//! Gated recurrent unit cell with explicit forward cache and backward pass.
//!
//! ```text
//! z  = sigmoid(Wz x + Uz h + bz)
//! r  = sigmoid(Wr x + Ur h + br)
//! n  = tanh(Wh x + r * (Uh h) + bh)
//! h' = (1 - z) * n + z * h
//! ```

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tensor::{sigmoid, Tensor};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct GruParams<S> {
    pub wz: Tensor<S>,
    pub wr: Tensor<S>,
    pub wh: Tensor<S>,
    pub uz: Tensor<S>,
    pub ur: Tensor<S>,
    pub uh: Tensor<S>,
    pub bz: Tensor<S>,
    pub br: Tensor<S>,
    pub bh: Tensor<S>,
}

pub const GRU_TENSORS: [&str; 9] = ["wz", "wr", "wh", "uz", "ur", "uh", "bz", "br", "bh"];

impl<S: Scalar> GruParams<S> {
    pub fn new(input: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        GruParams {
            wz: Tensor::glorot(hidden, input, rng),
            wr: Tensor::glorot(hidden, input, rng),
            wh: Tensor::glorot(hidden, input, rng),
            uz: Tensor::glorot(hidden, hidden, rng),
            ur: Tensor::glorot(hidden, hidden, rng),
            uh: Tensor::glorot(hidden, hidden, rng),
            bz: Tensor::vector(hidden),
            br: Tensor::vector(hidden),
            bh: Tensor::vector(hidden),
        }
    }

    pub fn hidden(&self) -> usize {
        self.wz.rows
    }

    pub fn tensors(&self) -> [&Tensor<S>; 9] {
        [
            &self.wz, &self.wr, &self.wh, &self.uz, &self.ur, &self.uh, &self.bz, &self.br, &self.bh,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Tensor<S>; 9] {
        [
            &mut self.wz,
            &mut self.wr,
            &mut self.wh,
            &mut self.uz,
            &mut self.ur,
            &mut self.uh,
            &mut self.bz,
            &mut self.br,
            &mut self.bh,
        ]
    }
}

/// Everything the backward pass needs from one cell application.
#[derive(Debug, Clone)]
pub struct GruStep<S> {
    pub x: Vec<S>,
    pub h_prev: Vec<S>,
    z: Vec<S>,
    r: Vec<S>,
    n: Vec<S>,
    uh_h: Vec<S>,
    pub h: Vec<S>,
}

pub fn gru_forward<S: Scalar>(p: &GruParams<S>, x: &[S], h_prev: &[S]) -> GruStep<S> {
    let d = p.hidden();
    let mut z = p.wz.matvec(x);
    let mut r = p.wr.matvec(x);
    let mut n = p.wh.matvec(x);
    let zero_h = h_prev.iter().all(|v| *v == S::zero());
    let uh_h = if zero_h {
        vec![S::zero(); d]
    } else {
        let uz = p.uz.matvec(h_prev);
        let ur = p.ur.matvec(h_prev);
        for i in 0..d {
            z[i] = z[i] + uz[i];
            r[i] = r[i] + ur[i];
        }
        p.uh.matvec(h_prev)
    };
    let mut h = vec![S::zero(); d];
    for i in 0..d {
        z[i] = sigmoid(z[i] + p.bz.data[i]);
        r[i] = sigmoid(r[i] + p.br.data[i]);
        n[i] = (n[i] + r[i] * uh_h[i] + p.bh.data[i]).tanh();
        h[i] = (S::one() - z[i]) * n[i] + z[i] * h_prev[i];
    }
    GruStep {
        x: x.to_vec(),
        h_prev: h_prev.to_vec(),
        z,
        r,
        n,
        uh_h,
        h,
    }
}

/// Accumulates parameter gradients into `g`, input gradient into `dx`
/// and previous-hidden gradient into `dh_prev`.
pub fn gru_backward<S: Scalar>(
    p: &GruParams<S>,
    s: &GruStep<S>,
    dh: &[S],
    g: &mut GruParams<S>,
    dx: &mut [S],
    dh_prev: &mut [S],
) {
    let d = p.hidden();
    let one = S::one();
    let mut da_z = vec![S::zero(); d];
    let mut da_r = vec![S::zero(); d];
    let mut da_n = vec![S::zero(); d];
    let mut da_uh = vec![S::zero(); d];
    for i in 0..d {
        let (z, r, n) = (s.z[i], s.r[i], s.n[i]);
        dh_prev[i] = dh_prev[i] + dh[i] * z;
        let dn = dh[i] * (one - z);
        let dz = dh[i] * (s.h_prev[i] - n);
        da_n[i] = dn * (one - n * n);
        let dr = da_n[i] * s.uh_h[i];
        da_uh[i] = da_n[i] * r;
        da_z[i] = dz * z * (one - z);
        da_r[i] = dr * r * (one - r);
    }
    g.wz.outer_acc(&da_z, &s.x);
    g.wr.outer_acc(&da_r, &s.x);
    g.wh.outer_acc(&da_n, &s.x);
    g.bz.add_assign(&da_z);
    g.br.add_assign(&da_r);
    g.bh.add_assign(&da_n);
    p.wz.matvec_t_acc(&da_z, dx);
    p.wr.matvec_t_acc(&da_r, dx);
    p.wh.matvec_t_acc(&da_n, dx);
    if s.h_prev.iter().any(|v| *v != S::zero()) {
        g.uz.outer_acc(&da_z, &s.h_prev);
        g.ur.outer_acc(&da_r, &s.h_prev);
        g.uh.outer_acc(&da_uh, &s.h_prev);
    }
    p.uz.matvec_t_acc(&da_z, dh_prev);
    p.ur.matvec_t_acc(&da_r, dh_prev);
    p.uh.matvec_t_acc(&da_uh, dh_prev);
}
