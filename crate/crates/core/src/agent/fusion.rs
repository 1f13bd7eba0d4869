//! Attention fusion of the per-component observation vectors with the
//! graph vector:
//!
//! ```text
//! h_i   = tanh(W_o o_i + W_g g + b_g)
//! l_i   = W_l h_i + b_l
//! alpha = softmax over components i, separately per coordinate
//! v     = g + sum_i alpha_i * o_i
//! ```

use super::tensor::{add_into, Tensor};
use crate::scalar::Scalar;

pub struct FusionParams<'a, S> {
    pub w_o: &'a Tensor<S>,
    pub w_g: &'a Tensor<S>,
    pub b_g: &'a Tensor<S>,
    pub w_l: &'a Tensor<S>,
    pub b_l: &'a Tensor<S>,
}

pub struct FusionGrads<'a, S> {
    pub w_o: &'a mut Tensor<S>,
    pub w_g: &'a mut Tensor<S>,
    pub b_g: &'a mut Tensor<S>,
    pub w_l: &'a mut Tensor<S>,
    pub b_l: &'a mut Tensor<S>,
}

#[derive(Debug, Clone)]
pub struct FusionCache<S> {
    pub h: Vec<Vec<S>>,
    /// `alpha[i][k]`: weight of component `i` at coordinate `k`.
    pub alpha: Vec<Vec<S>>,
}

#[derive(Debug, thiserror::Error)]
#[error("fusion expects {expected}-dimensional inputs, got {got}")]
pub struct ShapeMismatch {
    pub expected: usize,
    pub got: usize,
}

/// Softmax across components for every coordinate.
pub fn component_softmax<S: Scalar>(logits: &[Vec<S>]) -> Vec<Vec<S>> {
    let c = logits.len();
    let d = logits.first().map_or(0, Vec::len);
    let mut alpha = vec![vec![S::zero(); d]; c];
    for k in 0..d {
        let max = (0..c).map(|i| logits[i][k]).fold(S::neg_infinity(), S::max);
        let mut sum = S::zero();
        for i in 0..c {
            alpha[i][k] = (logits[i][k] - max).exp();
            sum = sum + alpha[i][k];
        }
        for row in alpha.iter_mut() {
            row[k] = row[k] / sum;
        }
    }
    alpha
}

pub fn fuse<S: Scalar>(
    p: &FusionParams<'_, S>,
    o: &[Vec<S>],
    g: &[S],
) -> Result<(Vec<S>, FusionCache<S>), ShapeMismatch> {
    let d = p.w_o.rows;
    if let Some(bad) = o.iter().map(Vec::len).chain([g.len()]).find(|&l| l != d) {
        return Err(ShapeMismatch { expected: d, got: bad });
    }
    let mut q = p.w_g.matvec(g);
    add_into(&mut q, &p.b_g.data);
    let mut h = Vec::with_capacity(o.len());
    let mut logits = Vec::with_capacity(o.len());
    for oi in o {
        let mut hi = p.w_o.matvec(oi);
        for k in 0..d {
            hi[k] = (hi[k] + q[k]).tanh();
        }
        let mut li = p.w_l.matvec(&hi);
        add_into(&mut li, &p.b_l.data);
        h.push(hi);
        logits.push(li);
    }
    let alpha = component_softmax(&logits);
    let mut v = g.to_vec();
    for (oi, ai) in o.iter().zip(&alpha) {
        for k in 0..d {
            v[k] = v[k] + ai[k] * oi[k];
        }
    }
    Ok((v, FusionCache { h, alpha }))
}

/// Accumulates into `do_` (per component) and `dg`.
pub fn fuse_backward<S: Scalar>(
    p: &FusionParams<'_, S>,
    o: &[Vec<S>],
    g: &[S],
    cache: &FusionCache<S>,
    dv: &[S],
    grads: &mut FusionGrads<'_, S>,
    do_: &mut [Vec<S>],
    dg: &mut [S],
) {
    let d = p.w_o.rows;
    let c = o.len();
    add_into(dg, dv);
    let mut dalpha = vec![vec![S::zero(); d]; c];
    for i in 0..c {
        for k in 0..d {
            dalpha[i][k] = dv[k] * o[i][k];
            do_[i][k] = do_[i][k] + dv[k] * cache.alpha[i][k];
        }
    }
    let mut dq = vec![S::zero(); d];
    for k in 0..d {
        let mean: S = (0..c).map(|i| cache.alpha[i][k] * dalpha[i][k]).sum();
        for i in 0..c {
            // Reuse dalpha as the logit gradient.
            dalpha[i][k] = cache.alpha[i][k] * (dalpha[i][k] - mean);
        }
    }
    for i in 0..c {
        let dl = &dalpha[i];
        grads.w_l.outer_acc(dl, &cache.h[i]);
        grads.b_l.add_assign(dl);
        let mut dh = vec![S::zero(); d];
        p.w_l.matvec_t_acc(dl, &mut dh);
        for k in 0..d {
            let hk = cache.h[i][k];
            dh[k] = dh[k] * (S::one() - hk * hk);
        }
        grads.w_o.outer_acc(&dh, &o[i]);
        p.w_o.matvec_t_acc(&dh, &mut do_[i]);
        add_into(&mut dq, &dh);
    }
    grads.w_g.outer_acc(&dq, g);
    grads.b_g.add_assign(&dq);
    p.w_g.matvec_t_acc(&dq, dg);
}
