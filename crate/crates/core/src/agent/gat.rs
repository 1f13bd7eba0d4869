//! Single-head graph attention over the world graph, mean-pooled and
//! projected to one vector.

use serde::{Deserialize, Serialize};

use super::tensor::{dot, Tensor};
use crate::scalar::Scalar;

pub const LEAKY_SLOPE: f64 = 0.2;

/// Node token ids and undirected adjacency (self-loops included).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphInput {
    pub nodes: Vec<usize>,
    pub neighbors: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct GatCache<S> {
    z: Vec<Vec<S>>,
    /// Pre-activation score per (node, neighbor slot).
    pre: Vec<Vec<S>>,
    alpha: Vec<Vec<S>>,
    pooled: Vec<S>,
}

pub struct GatParams<'a, S> {
    pub embed: &'a Tensor<S>,
    pub w: &'a Tensor<S>,
    pub a_src: &'a Tensor<S>,
    pub a_dst: &'a Tensor<S>,
    pub out_w: &'a Tensor<S>,
    pub out_b: &'a Tensor<S>,
}

pub struct GatGrads<'a, S> {
    pub embed: &'a mut Tensor<S>,
    pub w: &'a mut Tensor<S>,
    pub a_src: &'a mut Tensor<S>,
    pub a_dst: &'a mut Tensor<S>,
    pub out_w: &'a mut Tensor<S>,
    pub out_b: &'a mut Tensor<S>,
}

fn leaky<S: Scalar>(x: S) -> S {
    if x > S::zero() {
        x
    } else {
        x * S::lit(LEAKY_SLOPE)
    }
}

/// Returns the graph vector; an empty graph maps to zero.
pub fn gat_forward<S: Scalar>(p: &GatParams<'_, S>, g: &GraphInput) -> (Vec<S>, Option<GatCache<S>>) {
    let d = p.w.rows;
    let n = g.nodes.len();
    if n == 0 {
        return (vec![S::zero(); p.out_w.rows], None);
    }
    let z: Vec<Vec<S>> = g.nodes.iter().map(|&t| p.w.matvec(p.embed.row(t))).collect();
    let s: Vec<S> = z.iter().map(|zi| dot(&p.a_src.data, zi)).collect();
    let t: Vec<S> = z.iter().map(|zi| dot(&p.a_dst.data, zi)).collect();
    let mut pre = Vec::with_capacity(n);
    let mut alpha = Vec::with_capacity(n);
    let mut pooled = vec![S::zero(); d];
    let inv_n = S::one() / S::from_usize(n).expect("node count");
    for i in 0..n {
        let e: Vec<S> = g.neighbors[i].iter().map(|&j| s[i] + t[j]).collect();
        let act: Vec<S> = e.iter().map(|&x| leaky(x)).collect();
        let a = super::tensor::softmax(&act);
        for (slot, &j) in g.neighbors[i].iter().enumerate() {
            let w = a[slot] * inv_n;
            for k in 0..d {
                pooled[k] = pooled[k] + w * z[j][k];
            }
        }
        pre.push(e);
        alpha.push(a);
    }
    let mut out = p.out_w.matvec(&pooled);
    for (o, &b) in out.iter_mut().zip(&p.out_b.data) {
        *o = *o + b;
    }
    (
        out,
        Some(GatCache {
            z,
            pre,
            alpha,
            pooled,
        }),
    )
}

pub fn gat_backward<S: Scalar>(
    p: &GatParams<'_, S>,
    g: &GraphInput,
    cache: Option<&GatCache<S>>,
    dout: &[S],
    grads: &mut GatGrads<'_, S>,
) {
    let Some(c) = cache else { return };
    let d = p.w.rows;
    let n = g.nodes.len();
    grads.out_w.outer_acc(dout, &c.pooled);
    grads.out_b.add_assign(dout);
    let mut dpooled = vec![S::zero(); d];
    p.out_w.matvec_t_acc(dout, &mut dpooled);
    let inv_n = S::one() / S::from_usize(n).expect("node count");
    let dh: Vec<S> = dpooled.iter().map(|&x| x * inv_n).collect();

    let mut dz = vec![vec![S::zero(); d]; n];
    let mut ds = vec![S::zero(); n];
    let mut dt = vec![S::zero(); n];
    for i in 0..n {
        let nb = &g.neighbors[i];
        let a = &c.alpha[i];
        // h_i = sum_j a_ij z_j
        let da: Vec<S> = nb.iter().map(|&j| dot(&dh, &c.z[j])).collect();
        for (slot, &j) in nb.iter().enumerate() {
            super::tensor::axpy(a[slot], &dh, &mut dz[j]);
        }
        let mean: S = a.iter().zip(&da).map(|(&x, &y)| x * y).sum();
        for (slot, &j) in nb.iter().enumerate() {
            let de = a[slot] * (da[slot] - mean);
            let slope = if c.pre[i][slot] > S::zero() {
                S::one()
            } else {
                S::lit(LEAKY_SLOPE)
            };
            let du = de * slope;
            ds[i] = ds[i] + du;
            dt[j] = dt[j] + du;
        }
    }
    for i in 0..n {
        super::tensor::axpy(ds[i], &c.z[i], &mut grads.a_src.data);
        super::tensor::axpy(dt[i], &c.z[i], &mut grads.a_dst.data);
        super::tensor::axpy(ds[i], &p.a_src.data, &mut dz[i]);
        super::tensor::axpy(dt[i], &p.a_dst.data, &mut dz[i]);
        let x = p.embed.row(g.nodes[i]);
        grads.w.outer_acc(&dz[i], x);
        let row = grads.embed.row_mut(g.nodes[i]);
        p.w.matvec_t_acc(&dz[i], row);
    }
}
