//! Greedy evaluation episodes.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::env::ShapedEnv;
use super::transcript::TranscriptStep;
use super::HarnessError;
use crate::agent::{Agent, Decoding};
use crate::game::{GameMode, GameSpec};
use crate::kg::KnowledgeGraph;
use crate::reward::RewardConfig;
use crate::story::FrameLexicon;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub seed: u64,
    pub won: bool,
    pub steps: u32,
    pub game_score: u32,
    /// Unscoped CS score; zero in training mode.
    pub cs: f64,
    pub persona_cs: BTreeMap<String, f64>,
    pub transcript: Vec<TranscriptStep>,
}

pub struct EvalSetup {
    pub spec: Arc<GameSpec>,
    pub story: Option<KnowledgeGraph>,
    pub rewards: RewardConfig<f64>,
    pub lexicon: Arc<FrameLexicon>,
    pub mode: GameMode,
}

/// Plays one greedy episode per seed. The seed drives the game reset and
/// the agent's tie-breaking generator.
pub fn evaluate(
    agent: &mut Agent,
    setup: &EvalSetup,
    seeds: impl IntoIterator<Item = u64>,
) -> Result<Vec<EpisodeResult>, HarnessError> {
    agent.check_game(&setup.spec)?;
    let mut out = Vec::new();
    for seed in seeds {
        agent.reseed(seed);
        let mut env = ShapedEnv::new(
            setup.spec.clone(),
            setup.mode,
            setup.story.clone(),
            setup.rewards,
            setup.lexicon.clone(),
            seed,
        );
        let mut transcript = Vec::new();
        let mut done = false;
        while !done {
            let input = agent.build_input(&env.observation, &env.world);
            let decision = agent.decide(&input, Decoding::Greedy);
            let action = agent.render(&decision);
            let step = env.step(&action)?;
            done = step.done;
            transcript.push(TranscriptStep::new(env.state.steps_taken, action, &step));
        }
        let game = env.game();
        let (cs, persona_cs) = match setup.mode {
            GameMode::Test => {
                let cs = game.cs_score(&env.state)?;
                let mut per = BTreeMap::new();
                for p in setup.spec.personas() {
                    per.insert(p.clone(), game.persona_cs_score(&env.state, Some(&p))?);
                }
                (cs, per)
            }
            GameMode::Train => (0.0, BTreeMap::new()),
        };
        out.push(EpisodeResult {
            seed,
            won: env.state.won,
            steps: env.state.steps_taken,
            game_score: env.state.game_score,
            cs,
            persona_cs,
            transcript,
        });
    }
    Ok(out)
}
