//! Token vocabulary for the observation encoders and graph nodes.
//!
//! Multi-word entity names ("gold cups", "living room") are single tokens,
//! matched greedily (longest first) before falling back to words.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::game::{GameSpec, ENGINE_PHRASES};
use crate::story::FrameLexicon;
use crate::world::PLAYER;

pub const UNKNOWN: &str = "<unk>";
pub const UNKNOWN_ID: usize = 0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    /// Multi-word tokens split into words, longest first.
    phrases: Vec<(Vec<String>, usize)>,
}

impl From<Vec<String>> for Vocab {
    fn from(tokens: Vec<String>) -> Self {
        let index: HashMap<String, usize> =
            tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let mut phrases: Vec<(Vec<String>, usize)> = tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| t.contains(' '))
            .map(|(i, t)| (t.split(' ').map(String::from).collect(), i))
            .collect();
        phrases.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.1.cmp(&b.1)));
        Vocab {
            tokens,
            index,
            phrases,
        }
    }
}

impl From<Vocab> for Vec<String> {
    fn from(v: Vocab) -> Self {
        v.tokens
    }
}

fn words(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !(c.is_alphanumeric() || c == '-' || c == '\''))
        .map(|w| w.trim_matches(|c| c == '-' || c == '\''))
        .filter(|w| !w.is_empty())
        .map(String::from)
        .collect()
}

/// Graph-node token for a relation label (kept apart from entity words).
pub fn relation_token(label: &str) -> String {
    format!("rel:{}", label.to_lowercase())
}

impl Vocab {
    /// Every word and entity name the game can show, plus relation labels.
    pub fn for_game(spec: &GameSpec, lexicon: &FrameLexicon) -> Self {
        let mut set = BTreeSet::new();
        let mut texts: Vec<&str> = vec![ENGINE_PHRASES, PLAYER];
        for room in &spec.rooms {
            texts.push(&room.description);
            texts.push(&room.name);
            set.insert(room.name.clone());
            set.extend(room.exits.keys().cloned());
        }
        for obj in &spec.objects {
            texts.push(&obj.description);
            set.insert(obj.name.clone());
            for a in &obj.actions {
                texts.push(&a.feedback);
            }
        }
        for t in &spec.templates {
            for v in t.verbs.iter().chain(&t.preps) {
                texts.push(v);
            }
        }
        for text in texts {
            set.extend(words(text));
        }
        for label in ["in", "has", "exit"]
            .into_iter()
            .map(String::from)
            .chain(lexicon.frames().into_iter().map(String::from))
        {
            set.insert(relation_token(&label));
        }
        let mut tokens = vec![UNKNOWN.to_string()];
        tokens.extend(set.into_iter().filter(|t| t != UNKNOWN));
        Vocab::from(tokens)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(UNKNOWN_ID)
    }

    pub fn tokenize(&self, text: &str) -> Vec<usize> {
        let ws = words(text);
        let mut out = Vec::with_capacity(ws.len());
        let mut i = 0;
        'outer: while i < ws.len() {
            for (phrase, id) in &self.phrases {
                let n = phrase.len();
                if i + n <= ws.len() && ws[i..i + n] == phrase[..] {
                    out.push(*id);
                    i += n;
                    continue 'outer;
                }
            }
            out.push(self.id(&ws[i]));
            i += 1;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiword_tokens_win() {
        let v = Vocab::from(vec![
            UNKNOWN.to_string(),
            "gold".into(),
            "gold cups".into(),
            "the".into(),
            "take".into(),
        ]);
        let ids = v.tokenize("Take the gold cups, then the gold and silver.");
        let toks: Vec<&str> = ids.iter().map(|&i| v.token(i)).collect();
        assert_eq!(
            toks,
            ["take", "the", "gold cups", UNKNOWN, "the", "gold", UNKNOWN, UNKNOWN]
        );
    }

    #[test]
    fn serde_round_trip() {
        let v = Vocab::from(vec![UNKNOWN.to_string(), "living room".into()]);
        let json = serde_json::to_string(&v).unwrap();
        let back: Vocab = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
        assert_eq!(back.tokenize("the living room"), vec![0, 1]);
    }
}
