use std::sync::Arc;

use kgshape::agent::gradcheck::{analytic_gradients, compare_gradients, gradient_check, ProbeItem};
use kgshape::agent::{Agent, Decoding, Hyperparams};
use kgshape::game::{GameMode, GameSpec};
use kgshape::harness::ShapedEnv;
use kgshape::reward::RewardConfig;
use kgshape::story::FrameLexicon;

/// A few sampled transitions from a small network on the shopping game,
/// with their decisions pinned.
fn probe(game: &str, n: usize) -> (Agent, Vec<ProbeItem>, Hyperparams) {
    let spec = Arc::new(GameSpec::shipped(game).unwrap());
    let lexicon = Arc::new(FrameLexicon::builtin());
    let hyper = Hyperparams {
        dim: 8,
        ..Default::default()
    };
    let mut agent = Agent::new(&spec, &lexicon, hyper.clone(), 3).unwrap();
    let mut env = ShapedEnv::new(spec, GameMode::Train, None, RewardConfig::default(), lexicon, 0);
    let mut items = Vec::new();
    for k in 0..n {
        let input = agent.build_input(&env.observation, &env.world);
        let d = agent.decide(&input, Decoding::Sample);
        let action = agent.render(&d);
        items.push(ProbeItem {
            input,
            arities: agent.arities(),
            template: d.template,
            objects: d.objects.clone(),
            advantage: 0.7 - 0.3 * k as f64,
            ret: 1.5 - 0.4 * k as f64,
        });
        env.step(&action).unwrap();
    }
    (agent, items, hyper)
}

#[test]
fn backward_matches_finite_differences() {
    let (agent, items, hyper) = probe("shopping", 4);
    let report = gradient_check(&agent.params, &items, &hyper);
    println!("max relative error {:.3e} at {}", report.max_rel_error, report.worst);
    assert!(report.checked == agent.params.num_params());
    assert!(report.max_rel_error <= 1e-4, "{report:?}");
}

#[test]
fn corrupted_gradient_is_caught() {
    let (agent, items, hyper) = probe("905", 2);
    let mut grads = analytic_gradients(&agent.params, &items, &hyper);
    grads.critic_b.data[0] *= 1.5;
    let report = compare_gradients(&agent.params, &grads, &items, &hyper);
    assert!(report.max_rel_error > 1e-2, "{report:?}");
    assert_eq!(report.worst, "critic_b[0]");
}
