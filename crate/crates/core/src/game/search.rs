//! Exhaustive breadth-first search over the engine: the reference for
//! shortest-win lengths and solvability.

use std::collections::{HashSet, VecDeque};

use super::engine::{Game, GameMode, GameState};
use super::spec::GameSpec;

/// Every command the agent's decoder could produce for this spec.
pub fn all_actions(spec: &GameSpec) -> Vec<String> {
    let vocab = spec.vocabulary();
    let mut out = Vec::new();
    for t in spec.templates() {
        match t.arity {
            0 => out.push(t.render(&[])),
            1 => out.extend(vocab.iter().map(|a| t.render(&[a]))),
            _ => {
                for a in &vocab {
                    for b in &vocab {
                        out.push(t.render(&[a, b]));
                    }
                }
            }
        }
    }
    out
}

fn bfs(spec: &GameSpec, goal: impl Fn(&Game, &GameState) -> bool) -> Option<Vec<String>> {
    let game = Game::new(spec.clone(), GameMode::Train);
    let actions = all_actions(spec);
    let (start, _) = game.reset(0);
    if goal(&game, &start) {
        return Some(Vec::new());
    }
    let mut seen = HashSet::from([start.dynamics_key()]);
    let mut queue = VecDeque::from([(start, Vec::<usize>::new())]);
    while let Some((state, path)) = queue.pop_front() {
        for (ai, a) in actions.iter().enumerate() {
            let mut next = state.clone();
            // The cap is the only reason a search state could be done.
            if next.done || game.step(&mut next, a).is_err() {
                continue;
            }
            let mut p = path.clone();
            p.push(ai);
            if goal(&game, &next) {
                return Some(p.into_iter().map(|i| actions[i].clone()).collect());
            }
            if next.done {
                continue;
            }
            if seen.insert(next.dynamics_key()) {
                queue.push_back((next, p));
            }
        }
    }
    None
}

/// A shortest winning command sequence, if one exists within the cap.
pub fn shortest_win(spec: &GameSpec) -> Option<Vec<String>> {
    bfs(spec, |g, s| g.is_won(s))
}
