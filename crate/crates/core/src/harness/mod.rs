//! Training, evaluation and reporting.

pub mod config;
pub mod env;
pub mod eval;
pub mod metrics;
pub mod train;
pub mod transcript;

use std::sync::Arc;

use thiserror::Error;

pub use config::{RunConfig, SHIPPED_CONFIGS};
pub use env::{ShapedEnv, StepOutcome};
pub use eval::{evaluate, EpisodeResult, EvalSetup};
pub use metrics::{compare, read_csv, summarize, write_csv, MetricsDelta, MetricsRow};
pub use train::{train, EpisodeLog, TrainLog};
pub use transcript::{write_jsonl, TranscriptStep};

use crate::agent::{Agent, AgentError};
use crate::game::{GameError, GameMode, GameSpec};
use crate::kg::KnowledgeGraph;
use crate::story::{check_coverage, resolve_story, story_to_kg, FrameLexicon, StoryError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid run config: {0}")]
    Config(String),
    #[error("cannot compare results from `{0}` with results from `{1}`")]
    GameMismatch(String, String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Story(#[from] StoryError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Everything a config refers to, loaded and checked.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub spec: Arc<GameSpec>,
    pub story: Option<KnowledgeGraph>,
    pub persona: Option<String>,
    pub lexicon: Arc<FrameLexicon>,
}

impl Loaded {
    pub fn from_config(cfg: &RunConfig) -> Result<Self, HarnessError> {
        let spec = GameSpec::resolve(&cfg.game)?;
        let lexicon = FrameLexicon::builtin();
        check_coverage(&lexicon, spec.templates().iter().map(|t| t.verb()))?;
        let (story, persona) = match &cfg.story {
            Some(id) => {
                let doc = resolve_story(id)?;
                (Some(story_to_kg(&doc, &lexicon)?), doc.persona)
            }
            None => (None, None),
        };
        Ok(Loaded {
            spec: Arc::new(spec),
            story,
            persona,
            lexicon: Arc::new(lexicon),
        })
    }

    pub fn eval_setup(&self, cfg: &RunConfig, mode: GameMode) -> EvalSetup {
        EvalSetup {
            spec: self.spec.clone(),
            story: self.story.clone(),
            rewards: cfg.rewards,
            lexicon: self.lexicon.clone(),
            mode,
        }
    }
}

/// Result of training and then evaluating one config.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub agent: Agent,
    pub log: TrainLog,
    pub episodes: Vec<EpisodeResult>,
    pub metrics: MetricsRow,
}

/// Trains per `cfg`, then evaluates greedily in test mode on seeds
/// `0..cfg.eval_seeds`. CS columns follow the story's persona, if any.
pub fn run(cfg: &RunConfig, progress: impl FnMut(&TrainLog)) -> Result<RunOutput, HarnessError> {
    let loaded = Loaded::from_config(cfg)?;
    let (mut agent, log) = train(cfg, loaded.spec.clone(), loaded.story.clone(), loaded.lexicon.clone(), progress)?;
    let setup = loaded.eval_setup(cfg, GameMode::Test);
    let episodes = evaluate(&mut agent, &setup, 0..cfg.eval_seeds as u64)?;
    let metrics = summarize(&cfg.name, &loaded.spec.game.id, loaded.persona.as_deref(), &episodes);
    Ok(RunOutput {
        agent,
        log,
        episodes,
        metrics,
    })
}
