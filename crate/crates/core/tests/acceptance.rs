//! End-to-end acceptance: trains every shipped config and prints one
//! PASS/FAIL line per criterion. Slow (several minutes on one core).

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use kgshape::agent::gradcheck::{analytic_gradients, compare_gradients, gradient_check, ProbeItem};
use kgshape::agent::{Agent, Decoding, Hyperparams};
use kgshape::game::search::{all_actions, shortest_win};
use kgshape::game::{GameMode, GameSpec};
use kgshape::harness::{run, RunConfig, RunOutput, ShapedEnv, SHIPPED_CONFIGS};
use kgshape::kg::{canonicalize, difference, intersection, KnowledgeGraph, Triple};
use kgshape::reward::RewardConfig;
use kgshape::story::{resolve_story, story_to_kg, FrameLexicon};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Pinned tolerances.
const STEP_BUDGET: usize = 50_000;
const TIME_BUDGET: Duration = Duration::from_secs(15 * 60);
const WIN_EXACT: f64 = 100.0;
const WIN_SEE_DOCTOR: f64 = 90.0;
const SHAPED_CS_4: f64 = 3.0;
const SHAPED_CS_8: f64 = 5.0;
const BASELINE_CS_MAX: f64 = 1.5;
const CS_GAP: f64 = 2.0;
const BFS_SLACK: f64 = 2.0;
const OWN_PERSONA_FRAC: f64 = 0.70;
const OTHER_PERSONA_FRAC: f64 = 0.30;
const GRADCHECK_TOL: f64 = 1e-4;
const NEGATIVE_CONTROL_MIN: f64 = 1e-2;
const ORACLE_GRAPHS: usize = 1000;

/// Bypasses the test harness's output capture so the report shows up in a
/// plain `cargo test` run.
fn say(line: &str) {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{line}").unwrap();
    out.flush().unwrap();
}

struct Report {
    lines: Vec<(String, bool, String)>,
}

impl Report {
    fn check(&mut self, name: &str, pass: bool, detail: String) {
        say(&format!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" }));
        self.lines.push((name.to_string(), pass, detail));
    }
}

struct Trained {
    cfg: RunConfig,
    out: RunOutput,
    elapsed: Duration,
}

fn train_all() -> BTreeMap<&'static str, Trained> {
    let mut runs = BTreeMap::new();
    for (id, _) in SHIPPED_CONFIGS {
        let cfg = RunConfig::resolve(id).unwrap();
        let t = Instant::now();
        let out = run(&cfg, |_| {}).unwrap();
        let elapsed = t.elapsed();
        let m = &out.metrics;
        say(&format!(
            "  trained {id:<20} {:>7} steps in {:>6.1}s  win {:>5.1}%  steps {:>5.2}  CS {:.2}",
            cfg.train_steps,
            elapsed.as_secs_f64(),
            m.win_rate,
            m.avg_steps,
            m.avg_cs
        ));
        runs.insert(*id, Trained { cfg, out, elapsed });
    }
    runs
}

fn avg_persona_cs(t: &Trained, persona: &str) -> f64 {
    let eps = &t.out.episodes;
    eps.iter().map(|e| e.persona_cs[persona]).sum::<f64>() / eps.len() as f64
}

const GAMES: &[(&str, f64)] = &[("905", WIN_EXACT), ("shopping", WIN_EXACT), ("see_doctor", WIN_SEE_DOCTOR)];

fn win_rates(r: &mut Report, runs: &BTreeMap<&str, Trained>) {
    let mut pass = true;
    let mut detail = Vec::new();
    for &(game, need) in GAMES {
        for kind in ["shaped", "baseline"] {
            let t = &runs[format!("{game}_{kind}").as_str()];
            let ok = t.out.metrics.win_rate >= need
                && t.cfg.train_steps <= STEP_BUDGET
                && t.elapsed <= TIME_BUDGET;
            pass &= ok;
            detail.push(format!("{game}/{kind} {:.0}%", t.out.metrics.win_rate));
        }
    }
    r.check("1 win rate", pass, detail.join(", "));
}

fn cs_ordering(r: &mut Report, runs: &BTreeMap<&str, Trained>) {
    let mut pass = true;
    let mut detail = Vec::new();
    for &(game, _) in GAMES {
        let shaped = &runs[format!("{game}_shaped").as_str()];
        let base = &runs[format!("{game}_baseline").as_str()];
        let max = GameSpec::shipped(game).unwrap().max_cs(None);
        let need = if max > 4.0 { SHAPED_CS_8 } else { SHAPED_CS_4 };
        let (s, b) = (shaped.out.metrics.avg_cs, base.out.metrics.avg_cs);
        pass &= s >= need && b <= BASELINE_CS_MAX && s - b >= CS_GAP;
        detail.push(format!("{game} {s:.2}/{max} vs {b:.2}"));
    }
    r.check("2 commonsense ordering", pass, detail.join(", "));
}

fn step_direction(r: &mut Report, runs: &BTreeMap<&str, Trained>) {
    let mut pass = true;
    let mut detail = Vec::new();
    for &(game, _) in GAMES {
        let shaped = &runs[format!("{game}_shaped").as_str()].out.metrics;
        let base = &runs[format!("{game}_baseline").as_str()].out.metrics;
        let bfs = shortest_win(&GameSpec::shipped(game).unwrap()).unwrap().len() as f64;
        let both_win = shaped.win_rate == WIN_EXACT && base.win_rate == WIN_EXACT;
        pass &= (!both_win || shaped.avg_steps >= base.avg_steps) && (base.avg_steps - bfs).abs() <= BFS_SLACK;
        detail.push(format!("{game} {:.2} vs {:.2} (shortest {bfs})", shaped.avg_steps, base.avg_steps));
    }
    r.check("3 step direction", pass, detail.join(", "));
}

fn personas(r: &mut Report, runs: &BTreeMap<&str, Trained>) {
    let spec = GameSpec::shipped("light_gold").unwrap();
    let all = spec.personas();
    let mut pass = true;
    let mut detail = Vec::new();
    for p in &all {
        let t = &runs[format!("light_{p}").as_str()];
        let mut ok = t.out.metrics.win_rate == WIN_EXACT;
        let own = avg_persona_cs(t, p) / spec.max_cs(Some(p));
        ok &= own >= OWN_PERSONA_FRAC;
        let mut worst_other = 0.0f64;
        for q in all.iter().filter(|q| *q != p) {
            worst_other = worst_other.max(avg_persona_cs(t, q) / spec.max_cs(Some(q)));
        }
        ok &= worst_other <= OTHER_PERSONA_FRAC;
        pass &= ok;
        detail.push(format!(
            "{p} own {:.0}% other<={:.0}% win {:.0}%",
            100.0 * own,
            100.0 * worst_other,
            t.out.metrics.win_rate
        ));
    }
    r.check("4 persona shaping", pass, detail.join(", "));
}

fn robustness(r: &mut Report, runs: &BTreeMap<&str, Trained>) {
    let dir = &runs["shopping_directory"].out.metrics;
    let base = &runs["shopping_baseline"].out.metrics;
    let pass = dir.win_rate == WIN_EXACT && dir.avg_cs >= base.avg_cs;
    r.check(
        "5 unreachable story entity",
        pass,
        format!("win {:.0}%, CS {:.2} vs baseline {:.2}", dir.win_rate, dir.avg_cs, base.avg_cs),
    );
}

fn probe(game: &str, n: usize) -> (Agent, Vec<ProbeItem>, Hyperparams) {
    let spec = Arc::new(GameSpec::shipped(game).unwrap());
    let lexicon = Arc::new(FrameLexicon::builtin());
    let hyper = Hyperparams {
        dim: 8,
        ..Default::default()
    };
    let mut agent = Agent::new(&spec, &lexicon, hyper.clone(), 11).unwrap();
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
            advantage: 1.0 - 0.5 * k as f64,
            ret: 0.5 + 0.25 * k as f64,
        });
        env.step(&action).unwrap();
    }
    (agent, items, hyper)
}

fn gradients(r: &mut Report) {
    let (agent, items, hyper) = probe("see_doctor", 3);
    let report = gradient_check(&agent.params, &items, &hyper);
    let mut grads = analytic_gradients(&agent.params, &items, &hyper);
    grads.tmpl_b.data[0] += 0.05;
    let control = compare_gradients(&agent.params, &grads, &items, &hyper);
    let pass = report.checked == agent.params.num_params()
        && report.max_rel_error <= GRADCHECK_TOL
        && control.max_rel_error > NEGATIVE_CONTROL_MIN;
    r.check(
        "6 gradient check",
        pass,
        format!(
            "{} params, max rel error {:.2e}; corrupted copy {:.2e}",
            report.checked, report.max_rel_error, control.max_rel_error
        ),
    );
}

const ENTITIES: &[&str] = &["you", "kitchen", "Coffee", "the shower", "pop tart", "a wallet"];
const RELATIONS: &[&str] = &["in", "has", "DRINK", "exit"];

fn random_graph(rng: &mut ChaCha8Rng) -> (KnowledgeGraph, Vec<Triple>) {
    let n = rng.gen_range(0..20);
    let list: Vec<Triple> = (0..n)
        .map(|_| {
            let s = ENTITIES[rng.gen_range(0..ENTITIES.len())];
            let rel = RELATIONS[rng.gen_range(0..RELATIONS.len())];
            let o = ENTITIES[rng.gen_range(0..ENTITIES.len())];
            canonicalize(s, rel, o).unwrap()
        })
        .collect();
    (list.iter().cloned().collect(), list)
}

fn set_algebra(rng: &mut ChaCha8Rng) -> bool {
    (0..ORACLE_GRAPHS).all(|_| {
        let (ga, la) = random_graph(rng);
        let (gb, lb) = random_graph(rng);
        let mut a: Vec<Triple> = la.clone();
        a.sort();
        a.dedup();
        let diff: Vec<Triple> = a.iter().filter(|t| !lb.contains(t)).cloned().collect();
        let inter: Vec<Triple> = a.iter().filter(|t| lb.contains(t)).cloned().collect();
        ga.len() == a.len()
            && difference(&ga, &gb).into_iter().collect::<Vec<_>>() == diff
            && intersection(&ga, &gb).into_iter().collect::<Vec<_>>() == inter
    })
}

/// Replays a random script on a fresh env and returns (per-step
/// breakdowns, story matches per episode, opening-observation edges).
fn replay(
    spec: &Arc<GameSpec>,
    story: Option<&KnowledgeGraph>,
    rewards: RewardConfig<f64>,
    script: &[usize],
) -> (ShapedEnv, Vec<kgshape::Breakdown>, Vec<usize>, usize) {
    let lexicon = Arc::new(FrameLexicon::builtin());
    let actions = all_actions(spec);
    let mut env = ShapedEnv::new(spec.clone(), GameMode::Train, story.cloned(), rewards, lexicon, 0);
    let mut opening = env.world.g_global.len();
    let mut steps = Vec::new();
    let mut matches = vec![0];
    for (k, &i) in script.iter().enumerate() {
        let out = env.step(&actions[i % actions.len()]).unwrap();
        steps.push(out.reward);
        *matches.last_mut().unwrap() += out.matched.len();
        if out.done {
            opening += env.reset(k as u64 + 1);
            matches.push(0);
        }
    }
    (env, steps, matches, opening)
}

fn reward_streams(rng: &mut ChaCha8Rng) -> (bool, bool, bool) {
    let lexicon = FrameLexicon::builtin();
    let (mut explore, mut cap, mut zero) = (true, true, true);
    for (game, story) in [("905", "905_human"), ("shopping", "shopping_human"), ("see_doctor", "see_doctor_human")] {
        let spec = Arc::new(GameSpec::shipped(game).unwrap());
        let story = story_to_kg(&resolve_story(story).unwrap(), &lexicon).unwrap();
        for _ in 0..20 {
            let script: Vec<usize> = (0..rng.gen_range(1..150)).map(|_| rng.gen()).collect();
            let cfg = RewardConfig::default();
            let (env, steps, matches, opening) = replay(&spec, Some(&story), cfg, &script);
            let sum_e: f64 = steps.iter().map(|s| s.explore).sum();
            explore &= sum_e as usize + opening == env.world.g_global.len();
            cap &= matches.iter().all(|&m| m <= story.len());
            let sum_s: f64 = steps.iter().map(|s| s.story).sum();
            cap &= sum_s <= cfg.rho * (story.len() * matches.len()) as f64 + 1e-9;

            let off = RewardConfig {
                alpha: 0.0,
                beta: 0.0,
                ..cfg
            };
            let (_, a, _, _) = replay(&spec, Some(&story), off, &script);
            let (_, b, _, _) = replay(&spec, None, off, &script);
            zero &= a.iter().zip(&b).all(|(x, y)| x.total == y.total && y.total == y.game);
        }
    }
    (explore, cap, zero)
}

fn properties(r: &mut Report, runs: &BTreeMap<&str, Trained>) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let algebra = set_algebra(&mut rng);
    let (explore, cap, zero) = reward_streams(&mut rng);

    let mut cfg = runs["905_shaped"].cfg.clone();
    cfg.train_steps = 500;
    cfg.hyper.dim = 8;
    let a = run(&cfg, |_| {}).unwrap();
    let b = run(&cfg, |_| {}).unwrap();
    let determinism = a.episodes == b.episodes && a.agent == b.agent;

    let solvable = ["905", "shopping", "see_doctor", "light_gold"]
        .iter()
        .all(|g| shortest_win(&GameSpec::shipped(g).unwrap()).is_some());

    let pass = algebra && explore && cap && zero && determinism && solvable;
    r.check(
        "7 property suites",
        pass,
        format!(
            "set algebra {algebra}, exploration identity {explore}, story cap {cap}, \
             zero-weight equality {zero}, determinism {determinism}, solvable {solvable}"
        ),
    );
}

#[test]
fn acceptance() {
    let runs = train_all();
    let mut r = Report { lines: Vec::new() };
    win_rates(&mut r, &runs);
    cs_ordering(&mut r, &runs);
    step_direction(&mut r, &runs);
    personas(&mut r, &runs);
    robustness(&mut r, &runs);
    gradients(&mut r);
    properties(&mut r, &runs);
    let failed: Vec<&str> = r.lines.iter().filter(|l| !l.1).map(|l| l.0.as_str()).collect();
    assert!(failed.is_empty(), "failed: {failed:?}");
}
