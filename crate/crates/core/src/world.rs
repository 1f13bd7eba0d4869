//! The world graph: what the agent currently knows about the game, built
//! from the engine's structured observation fields.

use std::collections::BTreeSet;

use crate::game::Observation;
use crate::kg::{canonicalize, KnowledgeGraph, Triple};
use crate::story::FrameLexicon;

pub const PLAYER: &str = "you";

/// Facts stated by one observation, plus the action record when the last
/// command succeeded.
pub fn extract_observation_triples(obs: &Observation, lexicon: &FrameLexicon) -> BTreeSet<Triple> {
    let mut out = BTreeSet::new();
    let mut add = |s: &str, r: &str, o: &str| {
        if let Ok(t) = canonicalize(s, r, o) {
            out.insert(t);
        }
    };
    add(PLAYER, "in", &obs.room);
    for item in &obs.inventory {
        add(PLAYER, "has", item);
    }
    for item in &obs.visible {
        add(item, "in", &obs.room);
    }
    for dir in &obs.exits {
        add(&obs.room, "exit", dir);
    }
    if let Some(action) = obs.action.as_ref().filter(|a| a.success) {
        let frame = lexicon
            .lemma(&action.verb)
            .and_then(|l| lexicon.frame_of(&l).map(str::to_string));
        if let (Some(frame), Some(object)) = (frame, action.objects.first()) {
            add(PLAYER, &frame, object);
        }
    }
    out
}

/// Result of folding one observation into the world graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WorldUpdate {
    /// Triples not held at any point earlier in this episode.
    pub new_edges: BTreeSet<Triple>,
    /// Edges of the current graph that entered the run-wide union now.
    pub global_new: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WorldKgState {
    pub g_t: KnowledgeGraph,
    pub g_global: KnowledgeGraph,
    pub matched_story_triples: BTreeSet<Triple>,
    /// Everything `g_t` has held this episode.
    seen_episode: BTreeSet<Triple>,
}

fn is_location(t: &Triple) -> bool {
    t.subject() == PLAYER && t.relation() == "in"
}

impl WorldKgState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, triples: impl IntoIterator<Item = Triple>) -> WorldUpdate {
        let mut update = WorldUpdate::default();
        for t in triples {
            if is_location(&t) && !self.g_t.contains(&t) {
                self.g_t.retain(|old| !is_location(old));
            }
            if self.seen_episode.insert(t.clone()) {
                update.new_edges.insert(t.clone());
            }
            self.g_t.insert(t);
        }
        for t in &self.g_t {
            if self.g_global.insert(t.clone()) {
                update.global_new += 1;
            }
        }
        update
    }

    /// Clears the episode graph and matches; the run-wide union survives.
    pub fn episode_reset(&mut self) {
        self.g_t.clear();
        self.matched_story_triples.clear();
        self.seen_episode.clear();
    }

    /// Folds in the first observation of an episode. Story triples that
    /// already hold are marked matched so they are never paid.
    pub fn start_episode(&mut self, triples: impl IntoIterator<Item = Triple>, story: &KnowledgeGraph) -> WorldUpdate {
        self.episode_reset();
        let update = self.update(triples);
        self.matched_story_triples
            .extend(update.new_edges.iter().filter(|t| story.contains(t)).cloned());
        update
    }

    /// Entities of the current graph, used for the decoder mask.
    pub fn entities(&self) -> BTreeSet<&str> {
        self.g_t.entities()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::ActionRecord;

    fn obs(room: &str, inv: &[&str], action: Option<ActionRecord>) -> Observation {
        Observation {
            desc: String::new(),
            feedback: String::new(),
            inv: String::new(),
            prev_action: String::new(),
            room: room.into(),
            visible: vec![],
            inventory: inv.iter().map(|s| s.to_string()).collect(),
            exits: vec![],
            action,
        }
    }

    fn t(s: &str, r: &str, o: &str) -> Triple {
        Triple::new(s, r, o).unwrap()
    }

    #[test]
    fn inventory_and_location() {
        let lex = FrameLexicon::builtin();
        let got = extract_observation_triples(&obs("bedroom", &["wallet"], None), &lex);
        assert_eq!(got, BTreeSet::from([t("you", "in", "bedroom"), t("you", "has", "wallet")]));
    }

    #[test]
    fn action_record_only_on_success() {
        let lex = FrameLexicon::builtin();
        let eat = |success| ActionRecord {
            verb: "eat".into(),
            objects: vec!["pop-tart".into()],
            success,
        };
        let got = extract_observation_triples(&obs("kitchen", &[], Some(eat(true))), &lex);
        assert!(got.contains(&t("you", "EAT_BITE", "pop-tart")));
        let got = extract_observation_triples(&obs("kitchen", &[], Some(eat(false))), &lex);
        assert!(!got.iter().any(Triple::is_action_record));
    }

    #[test]
    fn single_location_and_new_edges() {
        let mut w = WorldKgState::new();
        let u = w.update([t("you", "DRINK", "coffee"), t("you", "in", "kitchen")]);
        assert!(u.new_edges.contains(&t("you", "DRINK", "coffee")));
        assert_eq!(u.global_new, 2);
        let u = w.update([t("you", "in", "kitchen")]);
        assert!(u.new_edges.is_empty());
        w.update([t("you", "in", "hall")]);
        assert_eq!(w.g_t.iter().filter(|t| is_location(t)).count(), 1);
        assert!(w.g_global.contains(&t("you", "in", "kitchen")));
        // Coming back is not new within the episode.
        let u = w.update([t("you", "in", "kitchen")]);
        assert!(u.new_edges.is_empty());

        let size = w.g_global.len();
        w.episode_reset();
        assert!(w.g_t.is_empty());
        assert_eq!(w.g_global.len(), size);
    }
}
