//! Per-step episode transcripts as JSON lines.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::env::StepOutcome;
use super::eval::EpisodeResult;
use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptStep {
    pub step: u32,
    pub action: String,
    pub feedback: String,
    pub room: String,
    pub game_reward: f64,
    pub story_reward: f64,
    pub explore_reward: f64,
    pub total_reward: f64,
    /// Story triples matched on this step, as `<s, r, o>`.
    pub matched: Vec<String>,
}

impl TranscriptStep {
    pub fn new(step: u32, action: String, out: &StepOutcome) -> Self {
        TranscriptStep {
            step,
            action,
            feedback: out.observation.feedback.clone(),
            room: out.observation.room.clone(),
            game_reward: out.reward.game,
            story_reward: out.reward.story,
            explore_reward: out.reward.explore,
            total_reward: out.reward.total,
            matched: out.matched.iter().map(|t| t.to_string()).collect(),
        }
    }
}

#[derive(Serialize)]
struct Line<'a> {
    seed: u64,
    #[serde(flatten)]
    step: &'a TranscriptStep,
}

/// One JSON object per step, tagged with the episode seed.
pub fn write_jsonl(path: impl AsRef<Path>, episodes: &[EpisodeResult]) -> Result<(), HarnessError> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for ep in episodes {
        for step in &ep.transcript {
            serde_json::to_writer(&mut w, &Line { seed: ep.seed, step })?;
            w.write_all(b"\n")?;
        }
    }
    w.flush()?;
    Ok(())
}
