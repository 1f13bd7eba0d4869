use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use super::StoryError;
use crate::kg::is_frame_label;

/// The lexicon shipped with the crate.
pub const DEFAULT_LEXICON: &str = include_str!("../../assets/lexicon/frames.tsv");

/// Irregular inflections that suffix stripping cannot recover.
const IRREGULAR: &[(&str, &str)] = &[
    ("am", "be"),
    ("are", "be"),
    ("ate", "eat"),
    ("been", "be"),
    ("bought", "buy"),
    ("caught", "catch"),
    ("did", "do"),
    ("does", "do"),
    ("done", "do"),
    ("drank", "drink"),
    ("drunk", "drink"),
    ("eaten", "eat"),
    ("found", "find"),
    ("gave", "give"),
    ("given", "give"),
    ("gone", "go"),
    ("got", "get"),
    ("gotten", "get"),
    ("had", "have"),
    ("has", "have"),
    ("is", "be"),
    ("left", "leave"),
    ("made", "make"),
    ("put", "put"),
    ("ran", "run"),
    ("saw", "see"),
    ("seen", "see"),
    ("taken", "take"),
    ("took", "take"),
    ("was", "be"),
    ("went", "go"),
    ("were", "be"),
    ("wore", "wear"),
    ("worn", "wear"),
];

/// Maps verb lemmas to frame labels, plus a table of event nouns
/// ("a shower", "breakfast") that name an action without a verb.
#[derive(Debug, Clone, Default)]
pub struct FrameLexicon {
    verbs: BTreeMap<String, String>,
    nouns: BTreeMap<String, String>,
    stopverbs: BTreeSet<String>,
}

impl FrameLexicon {
    pub fn parse(text: &str) -> Result<Self, StoryError> {
        let mut lex = FrameLexicon::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim_end();
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let malformed = |reason: &str| StoryError::MalformedLexicon {
                line: idx + 1,
                reason: reason.to_string(),
            };
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            let (word, label, kind) = match fields[..] {
                [w, l] => (w, l, None),
                [w, l, k] => (w, l, Some(k)),
                _ => return Err(malformed("expected 2 or 3 tab-separated fields")),
            };
            if word.is_empty() || word.chars().any(|c| !c.is_ascii_lowercase()) {
                return Err(malformed("word must be lowercase ASCII"));
            }
            if label == "-" {
                lex.stopverbs.insert(word.to_string());
                continue;
            }
            if !is_frame_label(label) {
                return Err(malformed("frame label must be uppercase ASCII with underscores"));
            }
            match kind {
                None => {
                    lex.verbs.insert(word.to_string(), label.to_string());
                }
                Some("noun") => {
                    lex.nouns.insert(word.to_string(), label.to_string());
                }
                Some(_) => return Err(malformed("third field must be `noun`")),
            }
        }
        Ok(lex)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, StoryError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn builtin() -> Self {
        Self::parse(DEFAULT_LEXICON).expect("shipped lexicon parses")
    }

    pub fn frame_of(&self, lemma: &str) -> Option<&str> {
        self.verbs.get(lemma).map(String::as_str)
    }

    pub fn event_noun_frame(&self, noun: &str) -> Option<&str> {
        self.nouns.get(noun).map(String::as_str)
    }

    pub fn is_stopverb(&self, lemma: &str) -> bool {
        self.stopverbs.contains(lemma)
    }

    pub fn frames(&self) -> BTreeSet<&str> {
        self.verbs
            .values()
            .chain(self.nouns.values())
            .map(String::as_str)
            .collect()
    }

    fn knows(&self, lemma: &str) -> bool {
        self.verbs.contains_key(lemma) || self.stopverbs.contains(lemma)
    }

    /// Maps an inflected form onto a lemma the lexicon knows, if any.
    pub fn lemma(&self, word: &str) -> Option<String> {
        let word = word.to_lowercase();
        if self.knows(&word) {
            return Some(word);
        }
        if let Some((_, base)) = IRREGULAR.iter().find(|(form, _)| *form == word) {
            return self.knows(base).then(|| base.to_string());
        }
        inflection_candidates(&word)
            .into_iter()
            .find(|c| self.knows(c))
    }
}

fn inflection_candidates(word: &str) -> Vec<String> {
    let mut out = Vec::new();
    let push_stem = |out: &mut Vec<String>, stem: &str| {
        if stem.len() < 2 {
            return;
        }
        out.push(stem.to_string());
        out.push(format!("{stem}e"));
        // Doubled final consonant: "hitting" -> "hit", "stopped" -> "stop".
        let b = stem.as_bytes();
        if b.len() >= 3 && b[b.len() - 1] == b[b.len() - 2] {
            out.push(stem[..stem.len() - 1].to_string());
        }
    };
    if let Some(stem) = word.strip_suffix("ied").or_else(|| word.strip_suffix("ies")) {
        out.push(format!("{stem}y"));
    }
    if let Some(stem) = word.strip_suffix("ing") {
        push_stem(&mut out, stem);
    }
    if let Some(stem) = word.strip_suffix("ed") {
        push_stem(&mut out, stem);
    }
    if let Some(stem) = word.strip_suffix("es") {
        out.push(stem.to_string());
    }
    if let Some(stem) = word.strip_suffix('s') {
        out.push(stem.to_string());
    }
    out
}
