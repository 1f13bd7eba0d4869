//! Deterministic text games defined by declarative specs.

mod engine;
pub mod search;
mod spec;

use thiserror::Error;

pub use engine::{
    ActionRecord, DynamicsKey, ENGINE_PHRASES, Event, Game, GameMode, GameState, Observation, ParsedAction, StepResult,
};
pub use spec::{
    ActionTemplate, CsRule, GameInfo, GameSpec, LoggedEvent, ObjectAction, ObjectSpec, Predicate, Room,
    DEFAULT_STEP_CAP, DIRECTIONS, INVENTORY, NOWHERE, SHIPPED_GAMES,
};

#[derive(Debug, Error)]
pub enum GameError {
    #[error("cannot parse game spec: {0}")]
    Parse(String),
    #[error("invalid game spec: {0}")]
    Validation(String),
    #[error("unknown game `{0}`")]
    UnknownGame(String),
    #[error("unknown persona `{0}`")]
    UnknownPersona(String),
    #[error("step called on a finished episode")]
    SteppedAfterDone,
    #[error("CS score is only available in test mode")]
    QueriedInTrainingMode,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
