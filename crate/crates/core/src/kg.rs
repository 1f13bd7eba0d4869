//! Triples and the set algebra shared by the story graph and the world graph.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KgError {
    #[error("triple field `{0}` is empty after trimming")]
    EmptyField(&'static str),
    #[error("line {line}: expected `subject<TAB>relation<TAB>object`, got {text:?}")]
    Malformed { line: usize, text: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Surface forms that name the same entity in stories and games.
const ALIASES: &[(&str, &str)] = &[
    ("clothing", "clothes"),
    ("watchmaker", "watch maker"),
    ("poptart", "pop-tart"),
    ("pop tart", "pop-tart"),
];

const ARTICLES: &[&str] = &["a", "an", "the"];

/// Frame labels are uppercase ASCII with underscores (`DRINK`, `EXIST_LIVE`).
pub fn is_frame_label(s: &str) -> bool {
    s.len() >= 2
        && s.bytes().all(|b| b.is_ascii_uppercase() || b == b'_')
        && s.bytes().any(|b| b.is_ascii_uppercase())
}

/// A canonical `<subject, relation, object>` edge.
///
/// Field order doubles as the sort key, so graphs iterate by
/// (subject, relation, object).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    subject: String,
    relation: String,
    object: String,
}

impl Triple {
    /// Canonicalizes all three components. See [`canonicalize`].
    pub fn new(subject: &str, relation: &str, object: &str) -> Result<Self, KgError> {
        canonicalize(subject, relation, object)
    }

    pub fn subject(&self) -> &str {
        &self.subject
    }

    pub fn relation(&self) -> &str {
        &self.relation
    }

    pub fn object(&self) -> &str {
        &self.object
    }

    pub fn is_action_record(&self) -> bool {
        is_frame_label(&self.relation)
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}, {}>", self.subject, self.relation, self.object)
    }
}

fn collapse(raw: &str) -> String {
    raw.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Lowercases, collapses whitespace, strips one leading article and maps
/// known aliases to their canonical entity name.
pub fn canonical_entity(raw: &str) -> String {
    let lowered = collapse(raw).to_lowercase();
    let stripped = match lowered.split_once(' ') {
        Some((head, rest)) if ARTICLES.contains(&head) => rest.to_string(),
        _ => lowered,
    };
    ALIASES
        .iter()
        .find(|(from, _)| *from == stripped)
        .map(|(_, to)| to.to_string())
        .unwrap_or(stripped)
}

/// Canonicalizes a relation: frame labels stay uppercase, structural
/// relations (`in`, `has`, ...) are lowercased.
pub fn canonical_relation(raw: &str) -> String {
    let collapsed = collapse(raw);
    if is_frame_label(&collapsed) {
        collapsed
    } else {
        collapsed.to_lowercase()
    }
}

pub fn canonicalize(subject: &str, relation: &str, object: &str) -> Result<Triple, KgError> {
    let subject = canonical_entity(subject);
    let relation = canonical_relation(relation);
    let object = canonical_entity(object);
    if subject.is_empty() {
        return Err(KgError::EmptyField("subject"));
    }
    if relation.is_empty() {
        return Err(KgError::EmptyField("relation"));
    }
    if object.is_empty() {
        return Err(KgError::EmptyField("object"));
    }
    Ok(Triple {
        subject,
        relation,
        object,
    })
}

/// A finite set of triples with deterministic (sorted) iteration.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeGraph {
    edges: BTreeSet<Triple>,
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts `t`, returning whether it was absent before.
    pub fn insert(&mut self, t: Triple) -> bool {
        self.edges.insert(t)
    }

    /// Non-mutating insert: the enlarged graph plus the `was_new` flag.
    pub fn with(&self, t: Triple) -> (KnowledgeGraph, bool) {
        let mut next = self.clone();
        let was_new = next.insert(t);
        (next, was_new)
    }

    pub fn remove(&mut self, t: &Triple) -> bool {
        self.edges.remove(t)
    }

    pub fn retain(&mut self, keep: impl FnMut(&Triple) -> bool) {
        self.edges.retain(keep);
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.edges.contains(t)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn clear(&mut self) {
        self.edges.clear();
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.edges.iter()
    }

    pub fn edges(&self) -> &BTreeSet<Triple> {
        &self.edges
    }

    /// All subjects and objects, sorted and deduplicated.
    pub fn entities(&self) -> BTreeSet<&str> {
        self.edges
            .iter()
            .flat_map(|t| [t.subject(), t.object()])
            .collect()
    }

    pub fn union_with(&mut self, other: &KnowledgeGraph) -> usize {
        let before = self.len();
        self.edges.extend(other.edges.iter().cloned());
        self.len() - before
    }

    /// Serializes as sorted `subject<TAB>relation<TAB>object` lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for t in &self.edges {
            out.push_str(&t.subject);
            out.push('\t');
            out.push_str(&t.relation);
            out.push('\t');
            out.push_str(&t.object);
            out.push('\n');
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self, KgError> {
        let mut g = KnowledgeGraph::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [s, r, o] = fields[..] else {
                return Err(KgError::Malformed {
                    line: idx + 1,
                    text: line.to_string(),
                });
            };
            g.insert(canonicalize(s, r, o)?);
        }
        Ok(g)
    }

    pub fn read_tsv(path: impl AsRef<Path>) -> Result<Self, KgError> {
        Self::from_tsv(&fs::read_to_string(path)?)
    }

    pub fn write_tsv(&self, path: impl AsRef<Path>) -> Result<(), KgError> {
        fs::write(path, self.to_tsv())?;
        Ok(())
    }
}

impl FromIterator<Triple> for KnowledgeGraph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        KnowledgeGraph {
            edges: iter.into_iter().collect(),
        }
    }
}

impl Extend<Triple> for KnowledgeGraph {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        self.edges.extend(iter);
    }
}

impl<'a> IntoIterator for &'a KnowledgeGraph {
    type Item = &'a Triple;
    type IntoIter = std::collections::btree_set::Iter<'a, Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.edges.iter()
    }
}

/// `{t : t in a and t not in b}`.
pub fn difference(a: &KnowledgeGraph, b: &KnowledgeGraph) -> BTreeSet<Triple> {
    a.edges.difference(&b.edges).cloned().collect()
}

pub fn intersection(a: &KnowledgeGraph, b: &KnowledgeGraph) -> BTreeSet<Triple> {
    a.edges.intersection(&b.edges).cloned().collect()
}

/// Number of `new_edges` that also appear in the story graph.
pub fn intersection_count<'a>(
    new_edges: impl IntoIterator<Item = &'a Triple>,
    story: &KnowledgeGraph,
) -> usize {
    new_edges.into_iter().filter(|t| story.contains(t)).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str, r: &str, o: &str) -> Triple {
        Triple::new(s, r, o).unwrap()
    }

    #[test]
    fn canonicalize_examples() {
        let drink = canonicalize("You", "DRINK", "the coffee").unwrap();
        assert_eq!(
            (drink.subject(), drink.relation(), drink.object()),
            ("you", "DRINK", "coffee")
        );
        let loc = canonicalize("You ", "in", "Kitchen").unwrap();
        assert_eq!(
            (loc.subject(), loc.relation(), loc.object()),
            ("you", "in", "kitchen")
        );
        assert!(matches!(
            canonicalize("", "in", "kitchen"),
            Err(KgError::EmptyField("subject"))
        ));
        assert!(matches!(
            canonicalize("you", "  ", "kitchen"),
            Err(KgError::EmptyField("relation"))
        ));
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(canonical_entity("Pop-Tart"), "pop-tart");
        assert_eq!(canonical_entity("the  Sermon\tHall"), "sermon hall");
        assert_eq!(canonical_entity("clothing"), "clothes");
        assert_eq!(canonical_entity("keys"), "keys");
        // Only a leading article is stripped.
        assert_eq!(canonical_entity("the a"), "a");
        assert_eq!(canonical_relation("In"), "in");
        assert_eq!(canonical_relation("EXIST_LIVE"), "EXIST_LIVE");
    }

    #[test]
    fn insert_is_set_insert() {
        let mut g = KnowledgeGraph::new();
        assert!(g.insert(t("you", "in", "kitchen")));
        assert!(!g.insert(t("you", "in", "kitchen")));
        assert_eq!(g.len(), 1);
        g.insert(t("you", "has", "wallet"));
        g.insert(t("wallet", "in", "bedroom"));
        assert_eq!(g.len(), 3);

        let (next, was_new) = KnowledgeGraph::new().with(t("you", "in", "kitchen"));
        assert!(was_new);
        assert_eq!(next.len(), 1);
    }

    #[test]
    fn difference_and_intersection() {
        let e1 = t("you", "in", "kitchen");
        let e2 = t("you", "DRINK", "coffee");
        let e3 = t("you", "has", "mug");
        let a: KnowledgeGraph = [e1.clone(), e2.clone()].into_iter().collect();
        let b: KnowledgeGraph = [e2.clone(), e3].into_iter().collect();
        assert_eq!(difference(&a, &b), BTreeSet::from([e1]));
        assert!(difference(&KnowledgeGraph::new(), &a).is_empty());

        let story: KnowledgeGraph = [e2.clone()].into_iter().collect();
        assert_eq!(intersection_count([&e2], &story), 1);
        assert_eq!(intersection_count(std::iter::empty(), &story), 0);
    }

    #[test]
    fn tsv_is_sorted_and_round_trips() {
        let g: KnowledgeGraph = [
            t("you", "in", "kitchen"),
            t("coffee", "in", "kitchen"),
            t("you", "DRINK", "coffee"),
        ]
        .into_iter()
        .collect();
        let tsv = g.to_tsv();
        assert_eq!(
            tsv,
            "coffee\tin\tkitchen\nyou\tDRINK\tcoffee\nyou\tin\tkitchen\n"
        );
        assert_eq!(KnowledgeGraph::from_tsv(&tsv).unwrap(), g);
        assert!(matches!(
            KnowledgeGraph::from_tsv("you\tin\n"),
            Err(KgError::Malformed { line: 1, .. })
        ));
    }
}
