//! Shallow subject-verb-object-PP labeler.
//!
//! Each sentence is tokenized and every token gets a coarse word class.
//! Lexicon verbs open a frame instance whose theme is the following noun
//! phrase (or coordinated list of noun phrases) and whose location/time
//! come from trailing `in/at/to/into/through` phrases. Event nouns
//! ("a shower", "a Pop-Tart breakfast") open an instance on their own.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::lexicon::FrameLexicon;
use crate::kg::canonical_entity;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameInstance {
    pub verb: String,
    pub frame: String,
    pub agent: String,
    pub theme: Option<String>,
    pub location: Option<String>,
    pub time: Option<String>,
}

/// Verb-like tokens the labeler saw but produced no frame for.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SkippedVerbs {
    pub words: Vec<String>,
}

impl SkippedVerbs {
    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

const DETERMINERS: &[&str] = &[
    "a", "an", "the", "some", "my", "your", "his", "her", "their", "our", "its", "this", "these",
    "those", "any", "every", "each", "many", "several", "all", "no", "appropriate",
];
const PRONOUNS: &[&str] = &[
    "i", "me", "we", "us", "you", "he", "him", "she", "it", "they", "them", "myself", "yourself",
    "himself", "herself", "itself", "themselves", "ourselves", "everything", "something",
    "anything", "nothing", "one",
];
const NARRATOR: &[&str] = &["i", "me", "we", "us", "you", "myself", "yourself", "ourselves"];
const PREPOSITIONS: &[&str] = &[
    "in", "at", "to", "into", "through", "inside", "on", "onto", "of", "with", "by", "for", "from",
    "near", "toward", "towards", "under", "over", "about", "after", "before", "upon", "across",
    "around", "behind", "past", "out", "without", "during",
];
const LOCATIVE: &[&str] = &["in", "at", "to", "into", "through", "inside"];
const CONJUNCTIONS: &[&str] = &[
    "and", "or", "but", "then", "once", "so", "because", "while", "when", "until", "if", "as",
    "than", "nor",
];
const MODALS: &[&str] = &[
    "will", "would", "can", "could", "may", "might", "shall", "should", "must", "don't",
    "didn't", "doesn't", "can't", "won't", "cannot", "not", "never",
];
const ADVERBS: &[&str] = &[
    "also", "first", "then", "there", "here", "now", "immediately", "only", "just", "next",
    "again", "still", "even", "always", "finally", "after", "afterwards", "later", "soon",
    "already", "too", "very", "really", "quickly", "slowly",
];
const RELATIVES: &[&str] = &["that", "which", "who", "whom", "where", "whose", "what"];
const PARTICLES: &[&str] = &["on", "up", "off", "out", "around", "down", "away", "back"];
const LIGHT_VERBS: &[&str] = &["take", "have", "get", "make", "do"];
const INTO_VERBS: &[&str] = &["enter"];
const DEPARTURE_VERBS: &[&str] = &["leave", "exit"];
const TIME_WORDS: &[&str] = &[
    "morning", "evening", "night", "afternoon", "noon", "midnight", "today", "tonight",
    "tomorrow", "yesterday", "dawn", "dusk", "monday", "tuesday", "wednesday", "thursday",
    "friday", "saturday", "sunday",
];
const DIRECTIONS: &[&str] = &[
    "north", "south", "east", "west", "up", "down", "northeast", "northwest", "southeast",
    "southwest", "left", "right",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Det,
    Pron,
    Prep,
    Conj,
    Modal,
    Adv,
    Rel,
    Punct,
    /// Lexicon verb in verbal position (lemma stored on the token).
    Verb,
    /// Stop verb (be/have/do) in verbal position.
    Stop,
    Word,
}

#[derive(Debug, Clone)]
struct Token {
    text: String,
    lower: String,
    class: Class,
    lemma: Option<String>,
}

impl Token {
    fn capitalized(&self) -> bool {
        self.text.chars().next().is_some_and(char::is_uppercase)
    }

    fn starts_np(&self) -> bool {
        matches!(self.class, Class::Det | Class::Word)
    }
}

fn is_in(list: &[&str], w: &str) -> bool {
    list.contains(&w)
}

/// Splits text into sentences on terminal punctuation.
pub fn sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if matches!(c, '.' | '!' | '?') {
            if !cur.trim().is_empty() {
                out.push(cur.trim().to_string());
            }
            cur.clear();
        } else {
            cur.push(c);
        }
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

fn raw_tokens(sentence: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in sentence.chars() {
        if c.is_alphanumeric() || c == '-' || c == '\'' || c == '\u{2019}' {
            cur.push(if c == '\u{2019}' { '\'' } else { c });
        } else {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            if matches!(c, ',' | ';' | ':') {
                out.push(c.to_string());
            }
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out.into_iter()
        .map(|t| t.trim_matches(|c| c == '-' || c == '\'').to_string())
        .filter(|t| !t.is_empty())
        .collect()
}

fn classify(sentence: &str, lexicon: &FrameLexicon) -> Vec<Token> {
    let mut tokens: Vec<Token> = Vec::new();
    for text in raw_tokens(sentence) {
        let lower = text.to_lowercase();
        let prev = tokens.last();
        let mut lemma = None;
        let class = if matches!(lower.as_str(), "," | ";" | ":") {
            Class::Punct
        } else if let Some(l) = lexicon.lemma(&lower).filter(|_| {
            verbal_position(prev, &lower, lexicon)
        }) {
            let class = if lexicon.is_stopverb(&l) {
                Class::Stop
            } else {
                Class::Verb
            };
            lemma = Some(l);
            class
        } else if is_in(DETERMINERS, &lower) {
            Class::Det
        } else if is_in(PRONOUNS, &lower) {
            Class::Pron
        } else if is_in(RELATIVES, &lower) {
            Class::Rel
        } else if is_in(PREPOSITIONS, &lower) {
            Class::Prep
        } else if is_in(CONJUNCTIONS, &lower) {
            Class::Conj
        } else if is_in(MODALS, &lower) {
            Class::Modal
        } else if is_in(ADVERBS, &lower) || (lower.ends_with("ly") && lower.len() > 4) {
            Class::Adv
        } else {
            Class::Word
        };
        tokens.push(Token {
            text,
            lower,
            class,
            lemma,
        });
    }
    tokens
}

/// Whether a lexicon word sits where a verb can: not after a determiner,
/// not inside a noun compound unless inflected, and after a preposition
/// only as a gerund or an infinitive.
fn verbal_position(prev: Option<&Token>, lower: &str, lexicon: &FrameLexicon) -> bool {
    let Some(prev) = prev else { return true };
    let lemma = lexicon.lemma(lower);
    let inflected = lemma.as_deref() != Some(lower);
    let stop = lemma.is_some_and(|l| lexicon.is_stopverb(&l));
    match prev.class {
        Class::Det => false,
        Class::Word => inflected || stop,
        Class::Prep => prev.lower == "to" || lower.ends_with("ing"),
        _ => true,
    }
}

/// A noun phrase: token span plus its canonical text.
#[derive(Debug, Clone)]
struct NounPhrase {
    start: usize,
    end: usize,
    words: Vec<String>,
}

impl NounPhrase {
    fn head(&self) -> &str {
        self.words.last().map(String::as_str).unwrap_or("")
    }

    fn text(&self) -> String {
        canonical_entity(&self.words.join(" "))
    }

    fn modifier(&self) -> Option<String> {
        (self.words.len() > 1).then(|| canonical_entity(&self.words[..self.words.len() - 1].join(" ")))
    }

    fn is_pronoun(&self) -> bool {
        self.words.len() == 1 && is_in(PRONOUNS, &self.words[0])
    }
}

/// `[det] word+ (of word+)*` starting at `i`.
fn parse_np(tokens: &[Token], i: usize) -> Option<NounPhrase> {
    let mut j = i;
    let mut words = Vec::new();
    if tokens.get(j)?.class == Class::Pron {
        return Some(NounPhrase {
            start: i,
            end: i + 1,
            words: vec![tokens[i].lower.clone()],
        });
    }
    while tokens.get(j).is_some_and(|t| t.class == Class::Det) {
        j += 1;
    }
    loop {
        let before = words.len();
        while let Some(t) = tokens.get(j).filter(|t| t.class == Class::Word) {
            words.push(t.lower.clone());
            j += 1;
        }
        if words.len() == before {
            break;
        }
        let of_continues = tokens.get(j).is_some_and(|t| t.lower == "of")
            && tokens.get(j + 1).is_some_and(|t| t.class == Class::Word);
        if !of_continues {
            break;
        }
        words.push("of".to_string());
        j += 1;
    }
    if words.is_empty() {
        return None;
    }
    Some(NounPhrase {
        start: i,
        end: j,
        words,
    })
}

/// Coordinated noun phrases: `NP (, NP)* (,)? and NP`.
fn parse_np_list(tokens: &[Token], i: usize) -> (Vec<NounPhrase>, usize) {
    let mut items = Vec::new();
    let Some(first) = parse_np(tokens, i) else {
        return (items, i);
    };
    let mut end = first.end;
    items.push(first);
    loop {
        let mut j = end;
        if tokens.get(j).is_some_and(|t| t.class == Class::Punct && t.lower == ",") {
            j += 1;
        }
        if tokens.get(j).is_some_and(|t| t.lower == "and" || t.lower == "or") {
            j += 1;
        }
        if j == end || !tokens.get(j).is_some_and(Token::starts_np) {
            break;
        }
        match parse_np(tokens, j) {
            Some(np) => {
                end = np.end;
                items.push(np);
            }
            None => break,
        }
    }
    (items, end)
}

#[derive(Debug, Default)]
struct Adjuncts {
    location: Option<String>,
    time: Option<String>,
}

/// Trailing prepositional phrases from `i` until a clause boundary.
fn parse_adjuncts(tokens: &[Token], mut i: usize) -> Adjuncts {
    let mut adj = Adjuncts::default();
    while let Some(tok) = tokens.get(i) {
        match tok.class {
            Class::Prep => {
                let Some(np) = tokens.get(i + 1).and_then(|_| parse_np(tokens, i + 1)) else {
                    break;
                };
                let first = &tokens[i + 1];
                let anchored = first.class == Class::Det || first.capitalized();
                if is_in(LOCATIVE, &tok.lower) && anchored && !np.is_pronoun() {
                    let head = np.head().to_string();
                    if is_in(TIME_WORDS, &head) {
                        adj.time.get_or_insert_with(|| np.text());
                    } else if !is_in(DIRECTIONS, &head) {
                        adj.location.get_or_insert_with(|| np.text());
                    }
                }
                i = np.end;
            }
            Class::Adv => i += 1,
            _ => break,
        }
    }
    adj
}

struct Labeler<'a> {
    tokens: Vec<Token>,
    lexicon: &'a FrameLexicon,
    consumed: BTreeSet<usize>,
    out: Vec<FrameInstance>,
    skipped: Vec<String>,
    last_agent: Option<String>,
}

impl<'a> Labeler<'a> {
    fn agent_for(&self, verb_idx: usize) -> String {
        let mut j = verb_idx;
        while j > 0 {
            j -= 1;
            let tok = &self.tokens[j];
            match tok.class {
                Class::Modal | Class::Adv | Class::Stop => continue,
                Class::Pron if is_in(NARRATOR, &tok.lower) => return "you".to_string(),
                Class::Pron => return tok.lower.clone(),
                Class::Word => {
                    let mut k = j;
                    while k > 0 && self.tokens[k - 1].class == Class::Word {
                        k -= 1;
                    }
                    let words: Vec<&str> =
                        self.tokens[k..=j].iter().map(|t| t.lower.as_str()).collect();
                    return canonical_entity(&words.join(" "));
                }
                Class::Conj | Class::Punct | Class::Prep => break,
                _ => break,
            }
        }
        self.last_agent.clone().unwrap_or_else(|| "you".to_string())
    }

    fn run(mut self) -> (Vec<FrameInstance>, SkippedVerbs) {
        for i in 0..self.tokens.len() {
            match self.tokens[i].class {
                Class::Verb => self.verb_instance(i),
                Class::Stop => self.stop_verb(i),
                Class::Word if i > 0 && self.tokens[i - 1].class == Class::Pron => {
                    // "I start", "he falls": an unknown verb after a subject.
                    self.skipped.push(self.tokens[i].lower.clone());
                }
                _ => {}
            }
        }
        self.event_nouns();
        (self.out, SkippedVerbs { words: self.skipped })
    }

    fn verb_instance(&mut self, i: usize) {
        let lemma = self.tokens[i].lemma.clone().expect("verb tokens carry a lemma");
        let Some(frame) = self.lexicon.frame_of(&lemma).map(str::to_string) else {
            return;
        };
        let agent = self.agent_for(i);
        self.last_agent = Some(agent.clone());

        let mut j = i + 1;
        while let Some(t) = self.tokens.get(j) {
            let particle = is_in(PARTICLES, &t.lower)
                && self.tokens.get(j + 1).is_some_and(Token::starts_np);
            if t.class == Class::Adv || particle {
                j += 1;
            } else {
                break;
            }
        }
        let (objects, after) = if self.tokens.get(j).is_some_and(Token::starts_np) {
            parse_np_list(&self.tokens, j)
        } else {
            (Vec::new(), j)
        };
        let adj = parse_adjuncts(&self.tokens, after);
        for np in &objects {
            self.consumed.extend(np.start..np.end);
        }

        let mut location = adj.location.clone();
        let mut themes: Vec<(String, String, String)> = Vec::new();
        for np in objects.iter().filter(|np| !np.is_pronoun()) {
            if is_in(INTO_VERBS, &lemma) {
                location.get_or_insert_with(|| np.text());
                continue;
            }
            if is_in(DEPARTURE_VERBS, &lemma) {
                continue;
            }
            match self.lexicon.event_noun_frame(np.head()) {
                Some(noun_frame) if is_in(LIGHT_VERBS, &lemma) => themes.push((
                    np.head().to_string(),
                    noun_frame.to_string(),
                    np.modifier().unwrap_or_else(|| np.text()),
                )),
                _ => themes.push((lemma.clone(), frame.clone(), np.text())),
            }
        }

        if themes.is_empty() {
            if location.is_some() {
                self.out.push(FrameInstance {
                    verb: lemma,
                    frame,
                    agent,
                    theme: None,
                    location,
                    time: adj.time,
                });
            }
            return;
        }
        for (verb, frame, theme) in themes {
            self.out.push(FrameInstance {
                verb,
                frame,
                agent: agent.clone(),
                theme: Some(theme),
                location: location.clone(),
                time: adj.time.clone(),
            });
        }
    }

    /// Stop verbs yield no frame, except scene descriptions ("malls have
    /// directory listings", "there is a dungeon") which the narrator sees.
    fn stop_verb(&mut self, i: usize) {
        let lemma = self.tokens[i].lemma.clone().unwrap_or_default();
        let prev = i.checked_sub(1).map(|p| &self.tokens[p]);
        let scene = match lemma.as_str() {
            "have" => prev.is_some_and(|p| p.class == Class::Word),
            "be" => prev.is_some_and(|p| p.lower == "there"),
            _ => false,
        };
        let see = self.lexicon.frame_of("see").map(str::to_string);
        let next_np = self.tokens.get(i + 1).is_some_and(Token::starts_np);
        match (scene && next_np, see) {
            (true, Some(frame)) => {
                let (objects, _) = parse_np_list(&self.tokens, i + 1);
                for np in objects {
                    self.consumed.extend(np.start..np.end);
                    self.out.push(FrameInstance {
                        verb: lemma.clone(),
                        frame: frame.clone(),
                        agent: "you".to_string(),
                        theme: Some(np.text()),
                        location: None,
                        time: None,
                    });
                }
            }
            _ => {
                let followed_by_verb = self
                    .tokens
                    .get(i + 1)
                    .is_some_and(|t| matches!(t.class, Class::Verb | Class::Stop));
                if !followed_by_verb {
                    self.skipped.push(self.tokens[i].lower.clone());
                }
            }
        }
    }

    fn event_nouns(&mut self) {
        let mut i = 0;
        while i < self.tokens.len() {
            if self.consumed.contains(&i) || !self.tokens[i].starts_np() {
                i += 1;
                continue;
            }
            let Some(np) = parse_np(&self.tokens, i) else {
                i += 1;
                continue;
            };
            if let Some(frame) = self.lexicon.event_noun_frame(np.head()) {
                let adj = parse_adjuncts(&self.tokens, np.end);
                self.out.push(FrameInstance {
                    verb: np.head().to_string(),
                    frame: frame.to_string(),
                    agent: self.last_agent.clone().unwrap_or_else(|| "you".to_string()),
                    theme: Some(np.modifier().unwrap_or_else(|| np.text())),
                    location: adj.location,
                    time: adj.time,
                });
            }
            i = np.end.max(i + 1);
        }
    }
}

/// Labels every recognized main verb (and event noun) in `sentence`.
pub fn label_frames(sentence: &str, lexicon: &FrameLexicon) -> (Vec<FrameInstance>, SkippedVerbs) {
    let tokens = classify(sentence, lexicon);
    Labeler {
        tokens,
        lexicon,
        consumed: BTreeSet::new(),
        out: Vec::new(),
        skipped: Vec::new(),
        last_agent: None,
    }
    .run()
}
