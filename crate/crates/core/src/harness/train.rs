//! The A2C training loop over a batch of shaped environments.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::env::ShapedEnv;
use super::HarnessError;
use crate::agent::{n_step_returns, Agent, Decision, Decoding, LossComponents, NetInput, TrainItem};
use crate::game::{GameMode, GameSpec};
use crate::kg::KnowledgeGraph;
use crate::story::FrameLexicon;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub env: usize,
    pub steps: u32,
    pub game_score: u32,
    pub won: bool,
    /// Undiscounted sum of shaped rewards.
    pub shaped_return: f64,
    pub story_matches: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub env_steps: usize,
    pub episodes: Vec<EpisodeLog>,
    pub losses: Vec<LossComponents>,
}

impl TrainLog {
    /// Win rate of the last `n` finished training episodes.
    pub fn recent_win_rate(&self, n: usize) -> f64 {
        let tail = &self.episodes[self.episodes.len().saturating_sub(n)..];
        if tail.is_empty() {
            return 0.0;
        }
        tail.iter().filter(|e| e.won).count() as f64 / tail.len() as f64
    }
}

fn episode_seed(run: u64, env: usize, episode: usize) -> u64 {
    run.wrapping_mul(1_000_003)
        .wrapping_add((env as u64) << 32)
        .wrapping_add(episode as u64)
}

struct Pending {
    input: NetInput,
    decision: Decision<f64>,
    reward: f64,
    done: bool,
}

/// Trains a fresh agent according to `cfg`. `progress` is called after
/// every update with the log so far.
pub fn train(
    cfg: &RunConfig,
    spec: Arc<GameSpec>,
    story: Option<KnowledgeGraph>,
    lexicon: Arc<FrameLexicon>,
    mut progress: impl FnMut(&TrainLog),
) -> Result<(Agent, TrainLog), HarnessError> {
    cfg.validate()?;
    let mut agent = Agent::new(&spec, &lexicon, cfg.hyper.clone(), cfg.seed)?;
    let n_envs = cfg.hyper.envs;
    let mut envs: Vec<ShapedEnv> = (0..n_envs)
        .map(|e| {
            ShapedEnv::new(
                spec.clone(),
                GameMode::Train,
                story.clone(),
                cfg.rewards,
                lexicon.clone(),
                episode_seed(cfg.seed, e, 0),
            )
        })
        .collect();
    let mut episode_count = vec![0usize; n_envs];
    let mut current: Vec<EpisodeLog> = (0..n_envs)
        .map(|env| EpisodeLog {
            env,
            ..Default::default()
        })
        .collect();
    let mut inputs: Vec<NetInput> = envs.iter().map(|e| agent.build_input(&e.observation, &e.world)).collect();
    let mut log = TrainLog::default();
    let gamma = cfg.hyper.gamma;

    while log.env_steps < cfg.train_steps {
        let mut rollout: Vec<Vec<Pending>> = (0..n_envs).map(|_| Vec::new()).collect();
        for _ in 0..cfg.hyper.n_step {
            for e in 0..n_envs {
                let decision = agent.decide(&inputs[e], Decoding::Sample);
                let action = agent.render(&decision);
                let out = envs[e].step(&action)?;
                log.env_steps += 1;
                let ep = &mut current[e];
                ep.steps += 1;
                ep.game_score += out.reward.game as u32;
                ep.shaped_return += out.reward.total;
                ep.story_matches += out.matched.len();
                ep.won |= out.won;
                if out.done {
                    log.episodes.push(std::mem::replace(
                        ep,
                        EpisodeLog {
                            env: e,
                            ..Default::default()
                        },
                    ));
                    episode_count[e] += 1;
                    envs[e].reset(episode_seed(cfg.seed, e, episode_count[e]));
                }
                let next = agent.build_input(&envs[e].observation, &envs[e].world);
                let input = std::mem::replace(&mut inputs[e], next);
                rollout[e].push(Pending {
                    input,
                    decision,
                    reward: out.reward.total,
                    done: out.done,
                });
            }
        }
        let mut items = Vec::with_capacity(n_envs * cfg.hyper.n_step);
        for (e, steps) in rollout.into_iter().enumerate() {
            let bootstrap = agent.params.encode_state(&inputs[e]).value;
            let rewards: Vec<f64> = steps.iter().map(|p| p.reward).collect();
            let dones: Vec<bool> = steps.iter().map(|p| p.done).collect();
            let returns = n_step_returns(&rewards, &dones, bootstrap, gamma);
            for (p, ret) in steps.into_iter().zip(returns) {
                items.push(TrainItem {
                    advantage: ret - p.decision.state.value,
                    ret,
                    input: p.input,
                    decision: p.decision,
                });
            }
        }
        log.losses.push(agent.update(&items)?);
        progress(&log);
    }
    Ok((agent, log))
}
