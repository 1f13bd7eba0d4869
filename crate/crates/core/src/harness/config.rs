//! Run configuration, read from TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::agent::Hyperparams;
use crate::reward::RewardConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Label used in metrics tables.
    pub name: String,
    /// Shipped game id or path to a `.game` file.
    pub game: String,
    /// Shipped story id or path; `None` trains without story shaping.
    #[serde(default)]
    pub story: Option<String>,
    #[serde(default)]
    pub rewards: RewardConfig<f64>,
    #[serde(default)]
    pub hyper: Hyperparams,
    /// Environment steps summed over all parallel environments.
    pub train_steps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_eval_seeds")]
    pub eval_seeds: usize,
}

fn default_eval_seeds() -> usize {
    20
}

pub const SHIPPED_CONFIGS: &[(&str, &str)] = &[
    ("905_shaped", include_str!("../../assets/configs/905_shaped.toml")),
    ("905_baseline", include_str!("../../assets/configs/905_baseline.toml")),
    ("shopping_shaped", include_str!("../../assets/configs/shopping_shaped.toml")),
    ("shopping_baseline", include_str!("../../assets/configs/shopping_baseline.toml")),
    ("see_doctor_shaped", include_str!("../../assets/configs/see_doctor_shaped.toml")),
    ("see_doctor_baseline", include_str!("../../assets/configs/see_doctor_baseline.toml")),
    ("shopping_directory", include_str!("../../assets/configs/shopping_directory.toml")),
    ("light_adventurer", include_str!("../../assets/configs/light_adventurer.toml")),
    ("light_thief", include_str!("../../assets/configs/light_thief.toml")),
    ("light_bum", include_str!("../../assets/configs/light_bum.toml")),
    ("light_thug", include_str!("../../assets/configs/light_thug.toml")),
];

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// A shipped config id, or else a path.
    pub fn resolve(id_or_path: &str) -> Result<Self, HarnessError> {
        match SHIPPED_CONFIGS.iter().find(|(id, _)| *id == id_or_path) {
            Some((_, text)) => Self::parse(text),
            None => Self::load(id_or_path),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.rewards.validate().map_err(HarnessError::Config)?;
        self.hyper.validate().map_err(HarnessError::Config)?;
        if self.train_steps == 0 || self.eval_seeds == 0 {
            return Err(HarnessError::Config("train_steps and eval_seeds must be positive".into()));
        }
        Ok(())
    }

    /// Baseline variant: same everything, no shaping.
    pub fn unshaped(&self) -> Self {
        RunConfig {
            name: format!("{} (no shaping)", self.name),
            story: None,
            rewards: RewardConfig {
                alpha: 0.0,
                beta: 0.0,
                ..self.rewards
            },
            ..self.clone()
        }
    }
}
