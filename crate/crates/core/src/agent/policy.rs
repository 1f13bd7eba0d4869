//! Parameters and the forward/backward passes of the actor-critic network.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::fusion::{fuse, fuse_backward, FusionCache, FusionGrads, FusionParams, ShapeMismatch};
use super::gat::{gat_backward, gat_forward, GatCache, GatGrads, GatParams, GraphInput};
use super::gru::{gru_backward, gru_forward, GruParams, GruStep, GRU_TENSORS};
use super::tensor::{add_into, axpy, dot, masked_softmax, Tensor};
use crate::scalar::Scalar;

/// Observation components: description, feedback, inventory, last action.
pub const COMPONENTS: usize = 4;
pub const COMPONENT_NAMES: [&str; COMPONENTS] = ["desc", "feedback", "inv", "prev_action"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct PolicyParams<S> {
    pub dim: usize,
    pub embed: Tensor<S>,
    pub encoders: Vec<GruParams<S>>,
    pub gat_w: Tensor<S>,
    pub gat_a_src: Tensor<S>,
    pub gat_a_dst: Tensor<S>,
    pub gat_out_w: Tensor<S>,
    pub gat_out_b: Tensor<S>,
    pub fuse_w_o: Tensor<S>,
    pub fuse_w_g: Tensor<S>,
    pub fuse_b_g: Tensor<S>,
    pub fuse_w_l: Tensor<S>,
    pub fuse_b_l: Tensor<S>,
    pub tmpl_gru: GruParams<S>,
    pub tmpl_w: Tensor<S>,
    pub tmpl_b: Tensor<S>,
    pub tmpl_embed: Tensor<S>,
    pub obj_gru: GruParams<S>,
    pub obj_embed: Tensor<S>,
    pub obj_w: Tensor<S>,
    pub obj_b: Tensor<S>,
    pub critic_w: Tensor<S>,
    pub critic_b: Tensor<S>,
}

/// Everything the network reads for one decision.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetInput {
    pub comps: [Vec<usize>; COMPONENTS],
    pub graph: GraphInput,
    /// Decoder-vocabulary entries allowed as objects.
    pub mask: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct StateCache<S> {
    enc: Vec<Vec<GruStep<S>>>,
    pub o: Vec<Vec<S>>,
    gat: Option<GatCache<S>>,
    pub g: Vec<S>,
    fusion: FusionCache<S>,
    pub v: Vec<S>,
    pub value: S,
    tmpl_step: GruStep<S>,
    pub tmpl_probs: Vec<S>,
}

#[derive(Debug, Clone)]
pub struct ObjectStep<S> {
    gru: GruStep<S>,
    pub probs: Vec<S>,
}

/// A template choice plus its object choices, with all forward caches.
#[derive(Debug, Clone)]
pub struct Decision<S> {
    pub state: StateCache<S>,
    pub template: usize,
    pub objects: Vec<usize>,
    pub obj_steps: Vec<ObjectStep<S>>,
}

impl<S: Scalar> Decision<S> {
    pub fn log_prob(&self) -> S {
        let mut lp = self.state.tmpl_probs[self.template].ln();
        for (step, &o) in self.obj_steps.iter().zip(&self.objects) {
            lp = lp + step.probs[o].ln();
        }
        lp
    }
}

fn scaled<S: Scalar>(mut t: Tensor<S>, k: f64) -> Tensor<S> {
    t.data.iter_mut().for_each(|x| *x = *x * S::lit(k));
    t
}

impl<S: Scalar> PolicyParams<S> {
    pub fn new(
        dim: usize,
        vocab: usize,
        templates: usize,
        objects: usize,
        rng: &mut impl Rng,
    ) -> Self {
        let d = dim;
        PolicyParams {
            dim,
            embed: Tensor::uniform(vocab, d, 0.5, rng),
            encoders: (0..COMPONENTS).map(|_| GruParams::new(d, d, rng)).collect(),
            gat_w: Tensor::glorot(d, d, rng),
            gat_a_src: Tensor::uniform(d, 1, 0.1, rng),
            gat_a_dst: Tensor::uniform(d, 1, 0.1, rng),
            gat_out_w: Tensor::glorot(d, d, rng),
            gat_out_b: Tensor::vector(d),
            fuse_w_o: Tensor::glorot(d, d, rng),
            fuse_w_g: Tensor::glorot(d, d, rng),
            fuse_b_g: Tensor::vector(d),
            fuse_w_l: Tensor::glorot(d, d, rng),
            fuse_b_l: Tensor::vector(d),
            tmpl_gru: GruParams::new(d, d, rng),
            // Small heads start the policy close to uniform.
            tmpl_w: scaled(Tensor::glorot(templates, d, rng), 0.1),
            tmpl_b: Tensor::vector(templates),
            tmpl_embed: Tensor::uniform(templates, d, 0.5, rng),
            obj_gru: GruParams::new(d, d, rng),
            obj_embed: Tensor::uniform(objects, d, 0.5, rng),
            obj_w: scaled(Tensor::glorot(objects, d, rng), 0.1),
            obj_b: Tensor::vector(objects),
            critic_w: scaled(Tensor::glorot(1, d, rng), 0.1),
            critic_b: Tensor::vector(1),
        }
    }

    /// Same shapes, all zeros (gradient accumulator).
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for t in z.tensors_mut() {
            t.fill_zero();
        }
        z
    }

    pub fn named_tensors(&self) -> Vec<(String, &Tensor<S>)> {
        let mut out: Vec<(String, &Tensor<S>)> = vec![("embed".into(), &self.embed)];
        for (c, enc) in self.encoders.iter().enumerate() {
            for (name, t) in GRU_TENSORS.iter().zip(enc.tensors()) {
                out.push((format!("enc_{}.{name}", COMPONENT_NAMES[c]), t));
            }
        }
        out.extend([
            ("gat_w".into(), &self.gat_w),
            ("gat_a_src".into(), &self.gat_a_src),
            ("gat_a_dst".into(), &self.gat_a_dst),
            ("gat_out_w".into(), &self.gat_out_w),
            ("gat_out_b".into(), &self.gat_out_b),
            ("fuse_w_o".into(), &self.fuse_w_o),
            ("fuse_w_g".into(), &self.fuse_w_g),
            ("fuse_b_g".into(), &self.fuse_b_g),
            ("fuse_w_l".into(), &self.fuse_w_l),
            ("fuse_b_l".into(), &self.fuse_b_l),
        ]);
        for (name, t) in GRU_TENSORS.iter().zip(self.tmpl_gru.tensors()) {
            out.push((format!("tmpl_gru.{name}"), t));
        }
        out.extend([
            ("tmpl_w".into(), &self.tmpl_w),
            ("tmpl_b".into(), &self.tmpl_b),
            ("tmpl_embed".into(), &self.tmpl_embed),
        ]);
        for (name, t) in GRU_TENSORS.iter().zip(self.obj_gru.tensors()) {
            out.push((format!("obj_gru.{name}"), t));
        }
        out.extend([
            ("obj_embed".into(), &self.obj_embed),
            ("obj_w".into(), &self.obj_w),
            ("obj_b".into(), &self.obj_b),
            ("critic_w".into(), &self.critic_w),
            ("critic_b".into(), &self.critic_b),
        ]);
        out
    }

    /// Mutable view in the same order as [`Self::named_tensors`].
    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor<S>> {
        let mut out: Vec<&mut Tensor<S>> = vec![&mut self.embed];
        for enc in &mut self.encoders {
            out.extend(enc.tensors_mut());
        }
        out.extend([
            &mut self.gat_w,
            &mut self.gat_a_src,
            &mut self.gat_a_dst,
            &mut self.gat_out_w,
            &mut self.gat_out_b,
            &mut self.fuse_w_o,
            &mut self.fuse_w_g,
            &mut self.fuse_b_g,
            &mut self.fuse_w_l,
            &mut self.fuse_b_l,
        ]);
        out.extend(self.tmpl_gru.tensors_mut());
        out.extend([&mut self.tmpl_w, &mut self.tmpl_b, &mut self.tmpl_embed]);
        out.extend(self.obj_gru.tensors_mut());
        out.extend([
            &mut self.obj_embed,
            &mut self.obj_w,
            &mut self.obj_b,
            &mut self.critic_w,
            &mut self.critic_b,
        ]);
        out
    }

    pub fn num_params(&self) -> usize {
        self.named_tensors().iter().map(|(_, t)| t.len()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.named_tensors().iter().all(|(_, t)| t.all_finite())
    }

    pub fn n_templates(&self) -> usize {
        self.tmpl_b.rows
    }

    pub fn n_objects(&self) -> usize {
        self.obj_b.rows
    }

    pub fn cast<T: Scalar>(&self) -> PolicyParams<T> {
        let json = serde_json::to_value(self).expect("params serialize");
        serde_json::from_value(json).expect("params deserialize as another float type")
    }

    fn gat_params(&self) -> GatParams<'_, S> {
        GatParams {
            embed: &self.embed,
            w: &self.gat_w,
            a_src: &self.gat_a_src,
            a_dst: &self.gat_a_dst,
            out_w: &self.gat_out_w,
            out_b: &self.gat_out_b,
        }
    }

    fn fusion_params(&self) -> FusionParams<'_, S> {
        FusionParams {
            w_o: &self.fuse_w_o,
            w_g: &self.fuse_w_g,
            b_g: &self.fuse_b_g,
            w_l: &self.fuse_w_l,
            b_l: &self.fuse_b_l,
        }
    }

    fn encode_component(&self, c: usize, tokens: &[usize]) -> Vec<GruStep<S>> {
        let mut h = vec![S::zero(); self.dim];
        let mut steps = Vec::with_capacity(tokens.len());
        for &tok in tokens {
            let step = gru_forward(&self.encoders[c], self.embed.row(tok), &h);
            h.clone_from(&step.h);
            steps.push(step);
        }
        steps
    }

    /// One vector per observation component; an empty component is zero.
    pub fn encode_observation(&self, comps: &[Vec<usize>; COMPONENTS]) -> Vec<Vec<S>> {
        (0..COMPONENTS)
            .map(|c| {
                self.encode_component(c, &comps[c])
                    .last()
                    .map_or_else(|| vec![S::zero(); self.dim], |s| s.h.clone())
            })
            .collect()
    }

    pub fn encode_graph(&self, graph: &GraphInput) -> Vec<S> {
        gat_forward(&self.gat_params(), graph).0
    }

    pub fn fuse(&self, o: &[Vec<S>], g: &[S]) -> Result<Vec<S>, ShapeMismatch> {
        fuse(&self.fusion_params(), o, g).map(|(v, _)| v)
    }

    pub fn encode_state(&self, input: &NetInput) -> StateCache<S> {
        let d = self.dim;
        let enc: Vec<Vec<GruStep<S>>> = (0..COMPONENTS)
            .map(|c| self.encode_component(c, &input.comps[c]))
            .collect();
        let o: Vec<Vec<S>> = enc
            .iter()
            .map(|steps| steps.last().map_or_else(|| vec![S::zero(); d], |s| s.h.clone()))
            .collect();
        let (g, gat) = gat_forward(&self.gat_params(), &input.graph);
        let (v, fusion) = fuse(&self.fusion_params(), &o, &g).expect("internal shapes agree");
        let value = dot(&self.critic_w.data, &v) + self.critic_b.data[0];
        let zero = vec![S::zero(); d];
        let tmpl_step = gru_forward(&self.tmpl_gru, &v, &zero);
        let mut logits = self.tmpl_w.matvec(&tmpl_step.h);
        add_into(&mut logits, &self.tmpl_b.data);
        let tmpl_probs = masked_softmax(&logits, None);
        StateCache {
            enc,
            o,
            gat,
            g,
            fusion,
            v,
            value,
            tmpl_step,
            tmpl_probs,
        }
    }

    fn object_step(&self, x: &[S], h: &[S], mask: &[bool]) -> ObjectStep<S> {
        let gru = gru_forward(&self.obj_gru, x, h);
        let mut logits = self.obj_w.matvec(&gru.h);
        add_into(&mut logits, &self.obj_b.data);
        let mask = if mask.iter().any(|&m| m) { Some(mask) } else { None };
        let probs = masked_softmax(&logits, mask);
        ObjectStep { gru, probs }
    }

    /// Runs the two-stage decoder; `choose` picks an index from each
    /// distribution (sampling, argmax, or a fixed replay).
    pub fn decide(
        &self,
        input: &NetInput,
        arities: &[u8],
        mut choose: impl FnMut(&[S]) -> usize,
    ) -> Decision<S> {
        let state = self.encode_state(input);
        let template = choose(&state.tmpl_probs);
        let mut objects = Vec::new();
        let mut obj_steps: Vec<ObjectStep<S>> = Vec::new();
        for k in 0..arities[template] as usize {
            let (x, h) = match k {
                0 => (self.tmpl_embed.row(template), &state.tmpl_step.h),
                _ => (self.obj_embed.row(objects[k - 1]), &obj_steps[k - 1].gru.h),
            };
            let step = self.object_step(x, h, &input.mask);
            objects.push(choose(&step.probs));
            obj_steps.push(step);
        }
        Decision {
            state,
            template,
            objects,
            obj_steps,
        }
    }

    /// Backpropagates upstream gradients on the template logits, each
    /// object step's logits and the value estimate into `g`.
    pub fn backward(
        &self,
        input: &NetInput,
        dec: &Decision<S>,
        d_tmpl: &[S],
        d_obj: &[Vec<S>],
        d_value: S,
        g: &mut PolicyParams<S>,
    ) {
        let d = self.dim;
        let st = &dec.state;
        let zeros = || vec![S::zero(); d];

        let mut dh_carry = zeros();
        for k in (0..dec.obj_steps.len()).rev() {
            let step = &dec.obj_steps[k];
            g.obj_w.outer_acc(&d_obj[k], &step.gru.h);
            g.obj_b.add_assign(&d_obj[k]);
            let mut dh = dh_carry;
            self.obj_w.matvec_t_acc(&d_obj[k], &mut dh);
            let mut dx = zeros();
            let mut dh_prev = zeros();
            gru_backward(&self.obj_gru, &step.gru, &dh, &mut g.obj_gru, &mut dx, &mut dh_prev);
            let row = if k == 0 {
                g.tmpl_embed.row_mut(dec.template)
            } else {
                g.obj_embed.row_mut(dec.objects[k - 1])
            };
            add_into(row, &dx);
            dh_carry = dh_prev;
        }

        g.tmpl_w.outer_acc(d_tmpl, &st.tmpl_step.h);
        g.tmpl_b.add_assign(d_tmpl);
        let mut dh_t = dh_carry;
        self.tmpl_w.matvec_t_acc(d_tmpl, &mut dh_t);
        let mut dv = zeros();
        let mut dh0 = zeros();
        gru_backward(&self.tmpl_gru, &st.tmpl_step, &dh_t, &mut g.tmpl_gru, &mut dv, &mut dh0);

        axpy(d_value, &self.critic_w.data, &mut dv);
        axpy(d_value, &st.v, &mut g.critic_w.data);
        g.critic_b.data[0] = g.critic_b.data[0] + d_value;

        let mut d_o = vec![zeros(); COMPONENTS];
        let mut dg = zeros();
        {
            let mut fg = FusionGrads {
                w_o: &mut g.fuse_w_o,
                w_g: &mut g.fuse_w_g,
                b_g: &mut g.fuse_b_g,
                w_l: &mut g.fuse_w_l,
                b_l: &mut g.fuse_b_l,
            };
            fuse_backward(&self.fusion_params(), &st.o, &st.g, &st.fusion, &dv, &mut fg, &mut d_o, &mut dg);
        }
        {
            let mut gg = GatGrads {
                embed: &mut g.embed,
                w: &mut g.gat_w,
                a_src: &mut g.gat_a_src,
                a_dst: &mut g.gat_a_dst,
                out_w: &mut g.gat_out_w,
                out_b: &mut g.gat_out_b,
            };
            gat_backward(&self.gat_params(), &input.graph, st.gat.as_ref(), &dg, &mut gg);
        }

        for c in 0..COMPONENTS {
            let mut dh = d_o[c].clone();
            for (i, step) in st.enc[c].iter().enumerate().rev() {
                let mut dx = zeros();
                let mut dh_prev = zeros();
                gru_backward(&self.encoders[c], step, &dh, &mut g.encoders[c], &mut dx, &mut dh_prev);
                add_into(g.embed.row_mut(input.comps[c][i]), &dx);
                dh = dh_prev;
            }
        }
    }
}
