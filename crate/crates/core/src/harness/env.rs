//! A game plus world graph plus reward shaping, stepped as one unit.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;

use crate::game::{Game, GameError, GameMode, GameSpec, GameState, Observation};
use crate::kg::{KnowledgeGraph, Triple};
use crate::reward::{exploration_reward, kg_intrinsic_reward, total_reward, RewardBreakdown, RewardConfig};
use crate::story::FrameLexicon;
use crate::world::{extract_observation_triples, WorldKgState};

#[derive(Debug, Clone, Serialize)]
pub struct StepOutcome {
    pub observation: Observation,
    pub reward: RewardBreakdown<f64>,
    /// Story triples paid for on this step.
    pub matched: BTreeSet<Triple>,
    pub done: bool,
    pub won: bool,
}

/// The world graph keeps its run-wide union across episodes.
#[derive(Debug, Clone)]
pub struct ShapedEnv {
    game: Game,
    lexicon: Arc<FrameLexicon>,
    story: KnowledgeGraph,
    pub rewards: RewardConfig<f64>,
    pub state: GameState,
    pub world: WorldKgState,
    pub observation: Observation,
}

impl ShapedEnv {
    pub fn new(
        spec: Arc<GameSpec>,
        mode: GameMode,
        story: Option<KnowledgeGraph>,
        rewards: RewardConfig<f64>,
        lexicon: Arc<FrameLexicon>,
        seed: u64,
    ) -> Self {
        let game = Game::new(spec, mode);
        let (state, observation) = game.reset(seed);
        let mut env = ShapedEnv {
            game,
            lexicon,
            story: story.unwrap_or_default(),
            rewards,
            state,
            world: WorldKgState::new(),
            observation,
        };
        env.begin();
        env
    }

    fn begin(&mut self) -> usize {
        let triples = extract_observation_triples(&self.observation, &self.lexicon);
        self.world.start_episode(triples, &self.story).global_new
    }

    /// Starts a new episode. Returns the exploration count of the opening
    /// observation (edges it added to the run-wide graph).
    pub fn reset(&mut self, seed: u64) -> usize {
        let (state, obs) = self.game.reset(seed);
        self.state = state;
        self.observation = obs;
        self.begin()
    }

    pub fn game(&self) -> &Game {
        &self.game
    }

    pub fn story(&self) -> &KnowledgeGraph {
        &self.story
    }

    pub fn step(&mut self, action: &str) -> Result<StepOutcome, GameError> {
        let res = self.game.step(&mut self.state, action)?;
        let triples = extract_observation_triples(&res.observation, &self.lexicon);
        let update = self.world.update(triples);
        let (r_s, matched) = kg_intrinsic_reward(
            &update.new_edges,
            &self.story,
            &self.world.matched_story_triples,
            &self.rewards,
        );
        self.world.matched_story_triples.extend(matched.iter().cloned());
        let r_e = exploration_reward(update.global_new);
        let reward = total_reward(f64::from(res.score_delta), r_s, r_e, &self.rewards);
        self.observation = res.observation.clone();
        Ok(StepOutcome {
            observation: res.observation,
            reward,
            matched,
            done: res.done,
            won: self.state.won,
        })
    }
}
