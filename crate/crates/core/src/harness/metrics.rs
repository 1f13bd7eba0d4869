//! Summary tables over evaluation episodes, written as CSV.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::eval::EpisodeResult;
use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    #[serde(rename = "Run")]
    pub run: String,
    #[serde(rename = "Game")]
    pub game: String,
    /// Persona whose CS rules were scored; empty for unscoped rules.
    #[serde(rename = "Persona")]
    pub persona: String,
    #[serde(rename = "Win Rate %")]
    pub win_rate: f64,
    #[serde(rename = "Avg Steps")]
    pub avg_steps: f64,
    #[serde(rename = "Avg CS Score")]
    pub avg_cs: f64,
    #[serde(rename = "Max CS Score")]
    pub max_cs: f64,
    #[serde(rename = "Avg Game Score")]
    pub avg_game_score: f64,
    #[serde(rename = "Max Game Score")]
    pub max_game_score: f64,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn max(xs: impl Iterator<Item = f64>) -> f64 {
    xs.fold(0.0, f64::max)
}

/// Aggregates episodes; CS columns use `persona`'s rules when given.
pub fn summarize(run: &str, game: &str, persona: Option<&str>, eps: &[EpisodeResult]) -> MetricsRow {
    let cs = |e: &EpisodeResult| match persona {
        Some(p) => e.persona_cs.get(p).copied().unwrap_or(0.0),
        None => e.cs,
    };
    MetricsRow {
        run: run.to_string(),
        game: game.to_string(),
        persona: persona.unwrap_or_default().to_string(),
        win_rate: 100.0 * mean(eps.iter().map(|e| f64::from(u8::from(e.won)))),
        avg_steps: mean(eps.iter().map(|e| f64::from(e.steps))),
        avg_cs: mean(eps.iter().map(cs)),
        max_cs: max(eps.iter().map(cs)),
        avg_game_score: mean(eps.iter().map(|e| f64::from(e.game_score))),
        max_game_score: max(eps.iter().map(|e| f64::from(e.game_score))),
    }
}

pub fn write_csv(path: impl AsRef<Path>, rows: &[MetricsRow]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<MetricsRow>, HarnessError> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// Column-wise `b - a` for rows matched by persona.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsDelta {
    pub persona: String,
    pub win_rate: f64,
    pub avg_steps: f64,
    pub avg_cs: f64,
    pub max_cs: f64,
    pub avg_game_score: f64,
    pub max_game_score: f64,
}

pub fn compare(a: &[MetricsRow], b: &[MetricsRow]) -> Result<Vec<MetricsDelta>, HarnessError> {
    let mut out = Vec::new();
    for ra in a {
        if let Some(rb) = b.iter().find(|rb| rb.persona == ra.persona) {
            if ra.game != rb.game {
                return Err(HarnessError::GameMismatch(ra.game.clone(), rb.game.clone()));
            }
            out.push(MetricsDelta {
                persona: ra.persona.clone(),
                win_rate: rb.win_rate - ra.win_rate,
                avg_steps: rb.avg_steps - ra.avg_steps,
                avg_cs: rb.avg_cs - ra.avg_cs,
                max_cs: rb.max_cs - ra.max_cs,
                avg_game_score: rb.avg_game_score - ra.avg_game_score,
                max_game_score: rb.max_game_score - ra.max_game_score,
            });
        }
    }
    if out.is_empty() {
        if let (Some(ra), Some(rb)) = (a.first(), b.first()) {
            if ra.game != rb.game {
                return Err(HarnessError::GameMismatch(ra.game.clone(), rb.game.clone()));
            }
        }
    }
    Ok(out)
}
