//! Synchronous advantage actor-critic: n-step returns, the combined loss,
//! its logit-level gradients, and Adam with global-norm clipping.

use serde::{Deserialize, Serialize};

use super::policy::{Decision, NetInput, PolicyParams};
use super::AgentError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub gamma: f64,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub template_coef: f64,
    pub object_coef: f64,
    pub lr: f64,
    pub n_step: usize,
    pub dim: usize,
    /// Parallel environments per update.
    pub envs: usize,
    pub grad_clip: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            gamma: 0.9,
            entropy_coef: 0.03,
            value_coef: 9.0,
            template_coef: 3.0,
            object_coef: 9.0,
            lr: 1e-3,
            n_step: 5,
            dim: 32,
            envs: 8,
            grad_clip: 10.0,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(format!("gamma must lie in [0, 1], got {}", self.gamma));
        }
        if !(self.lr > 0.0) {
            return Err(format!("lr must be positive, got {}", self.lr));
        }
        if self.n_step == 0 || self.dim == 0 || self.envs == 0 {
            return Err("n_step, dim and envs must be positive".into());
        }
        let coefs = [
            self.entropy_coef,
            self.value_coef,
            self.template_coef,
            self.object_coef,
            self.grad_clip,
        ];
        if coefs.iter().any(|c| !(*c >= 0.0)) {
            return Err("loss coefficients and grad_clip must be non-negative".into());
        }
        Ok(())
    }
}

/// Discounted n-step returns, bootstrapped from `bootstrap` unless an
/// episode boundary intervenes.
pub fn n_step_returns<S: Scalar>(rewards: &[S], dones: &[bool], bootstrap: S, gamma: S) -> Vec<S> {
    let mut out = vec![S::zero(); rewards.len()];
    let mut r = bootstrap;
    for t in (0..rewards.len()).rev() {
        if dones[t] {
            r = S::zero();
        }
        r = rewards[t] + gamma * r;
        out[t] = r;
    }
    out
}

/// One transition ready for the update; `advantage` and `ret` are treated
/// as constants.
#[derive(Debug, Clone)]
pub struct TrainItem<S> {
    pub input: NetInput,
    pub decision: Decision<S>,
    pub advantage: S,
    pub ret: S,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossComponents {
    pub template: f64,
    pub object: f64,
    pub value: f64,
    /// Summed entropy of all decoder distributions (a bonus; enters the
    /// loss negated).
    pub entropy: f64,
    pub total: f64,
}

struct DistLoss<S> {
    nll: S,
    entropy: S,
    dlogits: Vec<S>,
}

/// `policy_coef * (-A log p[a]) - entropy_coef * H(p)` and its gradient
/// with respect to the softmax logits.
fn dist_loss<S: Scalar>(p: &[S], a: usize, adv: S, policy_coef: S, entropy_coef: S) -> DistLoss<S> {
    let ent = super::tensor::entropy(p);
    let dlogits = p
        .iter()
        .enumerate()
        .map(|(j, &pj)| {
            let onehot = if j == a { S::one() } else { S::zero() };
            let pg = policy_coef * adv * (pj - onehot);
            let eg = if pj > S::zero() {
                entropy_coef * pj * (pj.ln() + ent)
            } else {
                S::zero()
            };
            pg + eg
        })
        .collect();
    DistLoss {
        nll: -p[a].ln(),
        entropy: ent,
        dlogits,
    }
}

/// Loss of one transition and its upstream gradients (template logits,
/// per-step object logits, value), all scaled by `weight`.
pub fn transition_loss<S: Scalar>(
    item: &TrainItem<S>,
    h: &Hyperparams,
    weight: S,
) -> (LossComponents, Vec<S>, Vec<Vec<S>>, S) {
    let dec = &item.decision;
    let adv = item.advantage;
    let ce = S::lit(h.entropy_coef) * weight;
    let t = dist_loss(
        &dec.state.tmpl_probs,
        dec.template,
        adv,
        S::lit(h.template_coef) * weight,
        ce,
    );
    let mut loss = LossComponents {
        template: (S::lit(h.template_coef) * adv * t.nll).to_f64_lossy(),
        entropy: t.entropy.to_f64_lossy(),
        ..Default::default()
    };
    let mut d_obj = Vec::with_capacity(dec.obj_steps.len());
    for (step, &o) in dec.obj_steps.iter().zip(&dec.objects) {
        let l = dist_loss(&step.probs, o, adv, S::lit(h.object_coef) * weight, ce);
        loss.object += (S::lit(h.object_coef) * adv * l.nll).to_f64_lossy();
        loss.entropy += l.entropy.to_f64_lossy();
        d_obj.push(l.dlogits);
    }
    let err = dec.state.value - item.ret;
    loss.value = (S::lit(h.value_coef * 0.5) * err * err).to_f64_lossy();
    let d_value = S::lit(h.value_coef) * err * weight;
    loss.total = loss.template + loss.object + loss.value - h.entropy_coef * loss.entropy;
    (loss, t.dlogits, d_obj, d_value)
}

/// Mean loss over `items`; gradients of that mean are accumulated into `grads`.
pub fn batch_gradients<S: Scalar>(
    params: &PolicyParams<S>,
    items: &[TrainItem<S>],
    h: &Hyperparams,
    grads: &mut PolicyParams<S>,
) -> LossComponents {
    let mut mean = LossComponents::default();
    if items.is_empty() {
        return mean;
    }
    let n = items.len() as f64;
    let w = S::lit(1.0 / n);
    for item in items {
        let (l, dt, dobj, dv) = transition_loss(item, h, w);
        params.backward(&item.input, &item.decision, &dt, &dobj, dv, grads);
        mean.template += l.template / n;
        mean.object += l.object / n;
        mean.value += l.value / n;
        mean.entropy += l.entropy / n;
        mean.total += l.total / n;
    }
    mean
}

pub fn global_norm<S: Scalar>(p: &PolicyParams<S>) -> f64 {
    p.named_tensors()
        .iter()
        .flat_map(|(_, t)| t.data.iter())
        .map(|x| {
            let x = x.to_f64_lossy();
            x * x
        })
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Adam<S> {
    m: PolicyParams<S>,
    v: PolicyParams<S>,
    t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl<S: Scalar> Adam<S> {
    pub fn new(params: &PolicyParams<S>) -> Self {
        Adam {
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// Clips `grads` to global norm `clip` (0 disables) and applies one
    /// update. Returns the pre-clip norm.
    pub fn step(&mut self, params: &mut PolicyParams<S>, grads: &PolicyParams<S>, lr: f64, clip: f64) -> f64 {
        let norm = global_norm(grads);
        let scale = if clip > 0.0 && norm > clip { clip / norm } else { 1.0 };
        self.t += 1;
        let t = self.t as i32;
        let c1 = 1.0 / (1.0 - self.beta1.powi(t));
        let c2 = 1.0 / (1.0 - self.beta2.powi(t));
        let (b1, b2, eps) = (S::lit(self.beta1), S::lit(self.beta2), S::lit(self.eps));
        let (scale, lr, c1, c2) = (S::lit(scale), S::lit(lr), S::lit(c1), S::lit(c2));
        let ps = params.tensors_mut();
        let ms = self.m.tensors_mut();
        let vs = self.v.tensors_mut();
        let gs = grads.named_tensors();
        for (((p, m), v), (_, g)) in ps.into_iter().zip(ms).zip(vs).zip(gs) {
            for i in 0..p.data.len() {
                let gi = g.data[i] * scale;
                m.data[i] = b1 * m.data[i] + (S::one() - b1) * gi;
                v.data[i] = b2 * v.data[i] + (S::one() - b2) * gi * gi;
                let mh = m.data[i] * c1;
                let vh = v.data[i] * c2;
                p.data[i] = p.data[i] - lr * mh / (vh.sqrt() + eps);
            }
        }
        norm
    }
}

/// One synchronous update from a batch of transitions.
pub fn a2c_update<S: Scalar>(
    params: &mut PolicyParams<S>,
    adam: &mut Adam<S>,
    items: &[TrainItem<S>],
    h: &Hyperparams,
) -> Result<LossComponents, AgentError> {
    let mut grads = params.zeros_like();
    let loss = batch_gradients(params, items, h, &mut grads);
    if !loss.total.is_finite() || !grads.all_finite() {
        return Err(AgentError::NonFiniteLoss);
    }
    adam.step(params, &grads, h.lr, h.grad_clip);
    if !params.all_finite() {
        return Err(AgentError::NonFiniteParams);
    }
    Ok(loss)
}
