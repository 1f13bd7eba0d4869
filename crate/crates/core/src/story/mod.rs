//! Exemplar stories and their conversion into a story graph.

mod labeler;
mod lexicon;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use labeler::{label_frames, sentences, FrameInstance, SkippedVerbs};
pub use lexicon::{FrameLexicon, DEFAULT_LEXICON};

use crate::kg::{canonicalize, KgError, KnowledgeGraph};

#[derive(Debug, Error)]
pub enum StoryError {
    #[error("story produced no frame instances")]
    EmptyStory,
    #[error("malformed header line {line}: {text:?}")]
    MalformedHeader { line: usize, text: String },
    #[error("lexicon line {line}: {reason}")]
    MalformedLexicon { line: usize, reason: String },
    #[error("lexicon has no frame for game verb `{0}`")]
    UncoveredVerb(String),
    #[error(transparent)]
    Kg(#[from] KgError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StorySource {
    #[default]
    Human,
    LlmFixture,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoryDocument {
    pub text: String,
    pub persona: Option<String>,
    pub source: StorySource,
}

impl StoryDocument {
    pub fn new(text: impl Into<String>) -> Self {
        StoryDocument {
            text: text.into(),
            persona: None,
            source: StorySource::Human,
        }
    }

    /// Parses `key: value` header lines (`persona`, `source`) followed by
    /// free text. Headers end at the first line that is not one.
    pub fn parse(raw: &str) -> Result<Self, StoryError> {
        let mut doc = StoryDocument::new(String::new());
        let mut body = Vec::new();
        let mut in_header = true;
        for (idx, line) in raw.lines().enumerate() {
            if in_header {
                if let Some((key, value)) = line.split_once(':') {
                    let key = key.trim().to_lowercase();
                    if key == "persona" || key == "source" {
                        let value = value.trim().to_lowercase();
                        let bad = || StoryError::MalformedHeader {
                            line: idx + 1,
                            text: line.to_string(),
                        };
                        if value.is_empty() {
                            return Err(bad());
                        }
                        if key == "persona" {
                            doc.persona = Some(value);
                        } else {
                            doc.source = match value.as_str() {
                                "human" => StorySource::Human,
                                "llm" | "llm_fixture" => StorySource::LlmFixture,
                                _ => return Err(bad()),
                            };
                        }
                        continue;
                    }
                }
                in_header = false;
            }
            body.push(line);
        }
        doc.text = body.join("\n").trim().to_string();
        if doc.text.is_empty() {
            return Err(StoryError::EmptyStory);
        }
        Ok(doc)
    }
}

/// Stories bundled with the crate, by id.
pub const SHIPPED_STORIES: &[(&str, &str)] = &[
    ("905_human", include_str!("../../assets/stories/905_human.story")),
    ("905_llm_1", include_str!("../../assets/stories/905_llm_1.story")),
    ("905_llm_2", include_str!("../../assets/stories/905_llm_2.story")),
    ("905_llm_3", include_str!("../../assets/stories/905_llm_3.story")),
    ("905_refined_man", include_str!("../../assets/stories/905_refined_man.story")),
    ("light_adventurer", include_str!("../../assets/stories/light_adventurer.story")),
    ("light_bum", include_str!("../../assets/stories/light_bum.story")),
    ("light_thief", include_str!("../../assets/stories/light_thief.story")),
    ("light_thug", include_str!("../../assets/stories/light_thug.story")),
    ("see_doctor_human", include_str!("../../assets/stories/see_doctor_human.story")),
    ("shopping_human", include_str!("../../assets/stories/shopping_human.story")),
    ("shopping_llm_directory", include_str!("../../assets/stories/shopping_llm_directory.story")),
];

/// A shipped story id, or else a path to a story file.
pub fn resolve_story(id_or_path: &str) -> Result<StoryDocument, StoryError> {
    match SHIPPED_STORIES.iter().find(|(id, _)| *id == id_or_path) {
        Some((_, text)) => StoryDocument::parse(text),
        None => load_story(id_or_path),
    }
}

pub fn load_story(path: impl AsRef<Path>) -> Result<StoryDocument, StoryError> {
    StoryDocument::parse(&fs::read_to_string(path)?)
}

/// Frame instances of every sentence, plus everything that was skipped.
pub fn label_story(doc: &StoryDocument, lexicon: &FrameLexicon) -> (Vec<FrameInstance>, SkippedVerbs) {
    let mut frames = Vec::new();
    let mut skipped = SkippedVerbs::default();
    for sentence in sentences(&doc.text) {
        let (f, s) = label_frames(&sentence, lexicon);
        frames.extend(f);
        skipped.words.extend(s.words);
    }
    (frames, skipped)
}

/// Triples implied by one frame instance.
pub fn instance_triples(f: &FrameInstance) -> Result<Vec<crate::kg::Triple>, KgError> {
    let mut out = Vec::new();
    if let Some(theme) = &f.theme {
        out.push(canonicalize(&f.agent, &f.frame, theme)?);
    }
    if let Some(loc) = &f.location {
        out.push(canonicalize(&f.agent, "in", loc)?);
    }
    if let Some(time) = &f.time {
        out.push(canonicalize(&f.agent, "at-time", time)?);
    }
    Ok(out)
}

/// The unordered set of facts the story implies.
pub fn story_to_kg(doc: &StoryDocument, lexicon: &FrameLexicon) -> Result<KnowledgeGraph, StoryError> {
    let (frames, _) = label_story(doc, lexicon);
    if frames.is_empty() {
        return Err(StoryError::EmptyStory);
    }
    let mut g = KnowledgeGraph::new();
    for f in &frames {
        g.extend(instance_triples(f)?);
    }
    Ok(g)
}

/// Every verb in `verbs` must have a frame.
pub fn check_coverage<'a>(
    lexicon: &FrameLexicon,
    verbs: impl IntoIterator<Item = &'a str>,
) -> Result<(), StoryError> {
    for v in verbs {
        if lexicon.frame_of(v).is_none() {
            return Err(StoryError::UncoveredVerb(v.to_string()));
        }
    }
    Ok(())
}
