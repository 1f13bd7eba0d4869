//! Intrinsic rewards and their combination with the game score.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::kg::{KnowledgeGraph, Triple};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", default, deny_unknown_fields)]
pub struct RewardConfig<S = f64> {
    /// Bonus per newly matched story triple.
    pub rho: S,
    /// Weight of the story-match reward.
    pub alpha: S,
    /// Weight of the exploration reward.
    pub beta: S,
    pub once_per_episode: bool,
}

impl<S: Scalar> Default for RewardConfig<S> {
    fn default() -> Self {
        RewardConfig {
            rho: S::one(),
            alpha: S::one(),
            beta: S::lit(0.5),
            once_per_episode: true,
        }
    }
}

impl<S: Scalar> RewardConfig<S> {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.rho > S::zero()) {
            return Err(format!("rho must be positive, got {}", self.rho));
        }
        if self.alpha < S::zero() || self.beta < S::zero() {
            return Err("alpha and beta must be non-negative".into());
        }
        Ok(())
    }
}

/// Story-match reward: `rho` per new edge that is also a story triple.
/// Returns the reward and the triples it paid for.
pub fn kg_intrinsic_reward<S: Scalar>(
    new_edges: &BTreeSet<Triple>,
    story: &KnowledgeGraph,
    matched_so_far: &BTreeSet<Triple>,
    cfg: &RewardConfig<S>,
) -> (S, BTreeSet<Triple>) {
    let matched: BTreeSet<Triple> = new_edges
        .iter()
        .filter(|t| story.contains(t))
        .filter(|t| !cfg.once_per_episode || !matched_so_far.contains(*t))
        .cloned()
        .collect();
    let n = S::from_usize(matched.len()).expect("count fits");
    (n * cfg.rho, matched)
}

/// Exploration reward: the number of edges that entered the run-wide graph.
pub fn exploration_reward<S: Scalar>(global_new: usize) -> S {
    S::from_usize(global_new).expect("count fits")
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct RewardBreakdown<S = f64> {
    pub game: S,
    pub story: S,
    pub explore: S,
    pub total: S,
}

/// `game + alpha * story + beta * explore`.
pub fn total_reward<S: Scalar>(r_game: S, r_s: S, r_e: S, cfg: &RewardConfig<S>) -> RewardBreakdown<S> {
    RewardBreakdown {
        game: r_game,
        story: r_s,
        explore: r_e,
        total: r_game + cfg.alpha * r_s + cfg.beta * r_e,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str, r: &str, o: &str) -> Triple {
        Triple::new(s, r, o).unwrap()
    }

    #[test]
    fn one_match_pays_rho() {
        let story: KnowledgeGraph = [t("you", "DRINK", "coffee")].into_iter().collect();
        let new = BTreeSet::from([t("you", "DRINK", "coffee"), t("you", "in", "kitchen")]);
        let cfg = RewardConfig::<f64>::default();
        let (r, m) = kg_intrinsic_reward(&new, &story, &BTreeSet::new(), &cfg);
        assert_eq!(r, 1.0);
        assert_eq!(m.len(), 1);
        let (r, _) = kg_intrinsic_reward(&new, &story, &m, &cfg);
        assert_eq!(r, 0.0);
        let (r, _) = kg_intrinsic_reward(&BTreeSet::new(), &story, &BTreeSet::new(), &cfg);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn combination() {
        let cfg = RewardConfig::<f64>::default();
        assert_eq!(total_reward(5.0, 0.0, 0.0, &cfg).total, 5.0);
        assert_eq!(total_reward(0.0, 2.0, 1.0, &cfg).total, 2.5);
        let off = RewardConfig { alpha: 0.0, beta: 0.0, ..cfg };
        assert_eq!(total_reward(5.0, 3.0, 7.0, &off).total, 5.0);
        assert_eq!(exploration_reward::<f64>(3), 3.0);
    }

    #[test]
    fn config_checks() {
        let bad = RewardConfig::<f64> { rho: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(RewardConfig::<f32>::default().validate().is_ok());
    }
}
