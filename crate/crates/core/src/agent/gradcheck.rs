//! Finite-difference verification of the hand-written backward pass.

use super::a2c::{batch_gradients, transition_loss, Hyperparams, TrainItem};
use super::policy::{NetInput, PolicyParams};

/// A transition with its decisions pinned so the loss is a smooth
/// function of the parameters.
#[derive(Debug, Clone)]
pub struct ProbeItem {
    pub input: NetInput,
    pub arities: Vec<u8>,
    pub template: usize,
    pub objects: Vec<usize>,
    pub advantage: f64,
    pub ret: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// `tensor[index]` of the worst coordinate.
    pub worst: String,
    pub checked: usize,
}

/// Denominator floor. Central differences carry round-off of roughly
/// `eps * |loss| / FD_STEP` (~1e-10 here), so coordinates whose gradient is
/// itself ~1e-7 are judged on absolute error instead of the ratio.
pub const REL_ERROR_FLOOR: f64 = 1e-5;
pub const FD_STEP: f64 = 1e-5;

fn replay(params: &PolicyParams<f64>, probe: &[ProbeItem]) -> Vec<TrainItem<f64>> {
    probe
        .iter()
        .map(|p| {
            let mut picks = std::iter::once(p.template).chain(p.objects.iter().copied());
            let decision = params.decide(&p.input, &p.arities, |_| picks.next().expect("enough fixed choices"));
            TrainItem {
                input: p.input.clone(),
                decision,
                advantage: p.advantage,
                ret: p.ret,
            }
        })
        .collect()
}

pub fn probe_loss(params: &PolicyParams<f64>, probe: &[ProbeItem], h: &Hyperparams) -> f64 {
    let items = replay(params, probe);
    let n = items.len() as f64;
    items
        .iter()
        .map(|it| transition_loss(it, h, 1.0).0.total / n)
        .sum()
}

pub fn analytic_gradients(params: &PolicyParams<f64>, probe: &[ProbeItem], h: &Hyperparams) -> PolicyParams<f64> {
    let mut grads = params.zeros_like();
    batch_gradients(params, &replay(params, probe), h, &mut grads);
    grads
}

/// Compares `analytic` against central differences on every coordinate.
pub fn compare_gradients(
    params: &PolicyParams<f64>,
    analytic: &PolicyParams<f64>,
    probe: &[ProbeItem],
    h: &Hyperparams,
) -> GradCheckReport {
    let mut work = params.clone();
    let names: Vec<String> = params.named_tensors().into_iter().map(|(n, _)| n).collect();
    let analytic = analytic.named_tensors();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst: String::new(),
        checked: 0,
    };
    for (ti, name) in names.iter().enumerate() {
        let len = analytic[ti].1.len();
        for i in 0..len {
            let orig = work.tensors_mut()[ti].data[i];
            work.tensors_mut()[ti].data[i] = orig + FD_STEP;
            let up = probe_loss(&work, probe, h);
            work.tensors_mut()[ti].data[i] = orig - FD_STEP;
            let down = probe_loss(&work, probe, h);
            work.tensors_mut()[ti].data[i] = orig;
            let numeric = (up - down) / (2.0 * FD_STEP);
            let a = analytic[ti].1.data[i];
            let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(REL_ERROR_FLOOR);
            report.checked += 1;
            if rel > report.max_rel_error || rel.is_nan() {
                report.max_rel_error = rel;
                report.worst = format!("{name}[{i}]");
            }
        }
    }
    report
}

pub fn gradient_check(params: &PolicyParams<f64>, probe: &[ProbeItem], h: &Hyperparams) -> GradCheckReport {
    let analytic = analytic_gradients(params, probe, h);
    compare_gradients(params, &analytic, probe, h)
}
