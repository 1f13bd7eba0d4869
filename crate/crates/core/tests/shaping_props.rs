//! Reward-stream identities replayed over random action scripts.

use std::sync::Arc;

use kgshape::game::search::all_actions;
use kgshape::game::{GameMode, GameSpec};
use kgshape::harness::ShapedEnv;
use kgshape::kg::{KnowledgeGraph, Triple};
use kgshape::reward::RewardConfig;
use kgshape::story::{resolve_story, story_to_kg, FrameLexicon};
use proptest::prelude::*;

const CASES: &[(&str, &str)] = &[
    ("905", "905_human"),
    ("shopping", "shopping_human"),
    ("see_doctor", "see_doctor_human"),
    ("light_gold", "light_thief"),
];

struct Fixture {
    spec: Arc<GameSpec>,
    story: KnowledgeGraph,
    actions: Vec<String>,
    lexicon: Arc<FrameLexicon>,
}

fn fixture(case: usize) -> Fixture {
    let (game, story) = CASES[case];
    let lexicon = FrameLexicon::builtin();
    let spec = GameSpec::shipped(game).unwrap();
    let story = story_to_kg(&resolve_story(story).unwrap(), &lexicon).unwrap();
    Fixture {
        actions: all_actions(&spec),
        spec: Arc::new(spec),
        story,
        lexicon: Arc::new(lexicon),
    }
}

fn env(f: &Fixture, rewards: RewardConfig, story: bool) -> ShapedEnv {
    ShapedEnv::new(
        f.spec.clone(),
        GameMode::Train,
        story.then(|| f.story.clone()),
        rewards,
        f.lexicon.clone(),
        0,
    )
}

/// Per-step rewards over `script`, restarting whenever an episode ends.
/// The opening observation's exploration count of every episode is returned
/// separately since no action earned it.
fn replay(e: &mut ShapedEnv, f: &Fixture, script: &[usize]) -> (Vec<kgshape::Breakdown>, Vec<Vec<Triple>>, usize) {
    let mut opening = e.world.g_global.len();
    let mut rewards = Vec::new();
    let mut matched_per_episode = vec![Vec::new()];
    for (k, &i) in script.iter().enumerate() {
        let out = e.step(&f.actions[i % f.actions.len()]).unwrap();
        rewards.push(out.reward);
        matched_per_episode.last_mut().unwrap().extend(out.matched);
        if out.done {
            opening += e.reset(k as u64 + 1);
            matched_per_episode.push(Vec::new());
        }
    }
    (rewards, matched_per_episode, opening)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exploration_sums_to_global_graph(case in 0..CASES.len(), script in prop::collection::vec(0usize..10_000, 1..160)) {
        let f = fixture(case);
        let mut e = env(&f, RewardConfig::default(), true);
        let (rewards, _, opening) = replay(&mut e, &f, &script);
        let total: f64 = rewards.iter().map(|r| r.explore).sum();
        prop_assert_eq!(total as usize + opening, e.world.g_global.len());
    }

    #[test]
    fn story_reward_is_capped_per_episode(case in 0..CASES.len(), script in prop::collection::vec(0usize..10_000, 1..160)) {
        let f = fixture(case);
        let rho = 1.5;
        let mut e = env(&f, RewardConfig { rho, ..Default::default() }, true);
        let (rewards, matched, _) = replay(&mut e, &f, &script);
        let total: f64 = rewards.iter().map(|r| r.story).sum();
        let episodes = matched.len() as f64;
        prop_assert!(total <= rho * f.story.len() as f64 * episodes + 1e-9);
        for m in matched {
            let unique: std::collections::BTreeSet<_> = m.iter().collect();
            prop_assert_eq!(unique.len(), m.len(), "a story triple was paid twice in one episode");
            prop_assert!(m.iter().all(|t| f.story.contains(t)));
        }
    }

    #[test]
    fn zero_weights_reproduce_the_game_reward(case in 0..CASES.len(), script in prop::collection::vec(0usize..10_000, 1..120)) {
        let f = fixture(case);
        let zero = RewardConfig { alpha: 0.0, beta: 0.0, ..Default::default() };
        let (shaped, _, _) = replay(&mut env(&f, zero, true), &f, &script);
        let (plain, _, _) = replay(&mut env(&f, zero, false), &f, &script);
        let a: Vec<f64> = shaped.iter().map(|r| r.total).collect();
        let b: Vec<f64> = plain.iter().map(|r| r.total).collect();
        let game: Vec<f64> = plain.iter().map(|r| r.game).collect();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&a, &game);
    }

    #[test]
    fn total_is_the_weighted_sum(case in 0..CASES.len(), alpha in 0.0f64..10.0, beta in 0.0f64..3.0, script in prop::collection::vec(0usize..10_000, 1..60)) {
        let f = fixture(case);
        let cfg = RewardConfig { alpha, beta, ..Default::default() };
        let (rewards, _, _) = replay(&mut env(&f, cfg, true), &f, &script);
        for r in rewards {
            prop_assert!((r.total - (r.game + alpha * r.story + beta * r.explore)).abs() < 1e-12);
        }
    }
}

#[test]
fn shopping_story_rewards_fire_at_coupon_and_try() {
    let f = fixture(1);
    let mut e = env(&f, RewardConfig::default(), true);
    let script = [
        "go south",
        "take coupon",
        "go north",
        "go east",
        "go north",
        "try clothes",
        "buy clothes",
        "take clothes",
    ];
    let story: Vec<(String, f64)> = script
        .iter()
        .map(|a| (a.to_string(), e.step(a).unwrap().reward.story))
        .filter(|(_, r)| *r > 0.0)
        .collect();
    assert_eq!(
        story,
        [("take coupon".to_string(), 1.0), ("try clothes".to_string(), 1.0)]
    );
}

#[test]
fn story_triples_in_the_opening_observation_are_never_paid() {
    let f = fixture(0);
    let mut story = KnowledgeGraph::new();
    story.insert(Triple::new("you", "in", "bedroom").unwrap());
    story.insert(Triple::new("you", "in", "bathroom").unwrap());
    let mut e = ShapedEnv::new(f.spec.clone(), GameMode::Train, Some(story), RewardConfig::default(), f.lexicon.clone(), 0);
    assert_eq!(e.step("go south").unwrap().reward.story, 1.0);
    assert_eq!(e.step("go north").unwrap().reward.story, 0.0);
}
