//! Declarative game definitions loaded from TOML.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::GameError;
use crate::kg::canonical_entity;

pub const DEFAULT_STEP_CAP: u32 = 50;
pub const INVENTORY: &str = "inventory";
pub const NOWHERE: &str = "nowhere";

pub const DIRECTIONS: &[&str] = &[
    "north", "south", "east", "west", "up", "down", "northeast", "northwest", "southeast",
    "southwest", "in", "out",
];

fn default_step_cap() -> u32 {
    DEFAULT_STEP_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameInfo {
    pub id: String,
    #[serde(default)]
    pub title: String,
    pub start: String,
    #[serde(default = "default_step_cap")]
    pub step_cap: u32,
    pub win_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Room {
    pub name: String,
    pub description: String,
    #[serde(default)]
    pub exits: BTreeMap<String, String>,
    /// Direction -> item that must be carried to pass.
    #[serde(default)]
    pub locks: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoggedEvent {
    pub verb: String,
    pub object: String,
}

/// One way an object reacts to a verb. Entries are tried in order; the
/// first whose requirements hold fires.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectAction {
    pub verb: String,
    /// Second object for two-blank templates ("give money to staff").
    #[serde(default)]
    pub target: Option<String>,
    /// Object must be carried rather than merely present.
    #[serde(default)]
    pub held: bool,
    #[serde(default)]
    pub once: bool,
    #[serde(default)]
    pub requires_items: Vec<String>,
    #[serde(default)]
    pub requires_flags: Vec<String>,
    #[serde(default)]
    pub consume: bool,
    #[serde(default)]
    pub consume_items: Vec<String>,
    #[serde(default)]
    pub grant_items: Vec<String>,
    /// Objects moved from nowhere into the current room.
    #[serde(default)]
    pub reveal: Vec<String>,
    #[serde(default)]
    pub set_flags: Vec<String>,
    /// Extra events beyond the implicit `(verb, object)`.
    #[serde(default)]
    pub log: Vec<LoggedEvent>,
    pub feedback: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub name: String,
    pub location: String,
    #[serde(default)]
    pub portable: bool,
    /// Portable only once this flag is set (paid-for goods).
    #[serde(default)]
    pub portable_when: Option<String>,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub actions: Vec<ObjectAction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionTemplate {
    pub verbs: Vec<String>,
    pub arity: u8,
    #[serde(default)]
    pub preps: Vec<String>,
}

impl ActionTemplate {
    pub fn verb(&self) -> &str {
        &self.verbs[0]
    }

    /// Renders the template with the first verb and preposition aliases.
    pub fn render(&self, objects: &[&str]) -> String {
        let mut out = self.verb().to_string();
        if let Some(o) = objects.first() {
            out.push(' ');
            out.push_str(o);
        }
        if let (Some(p), Some(o)) = (self.preps.first(), objects.get(1)) {
            out.push(' ');
            out.push_str(p);
            out.push(' ');
            out.push_str(o);
        }
        out
    }
}

impl fmt::Display for ActionTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "([{}]", self.verbs.join("/"))?;
        if self.arity >= 1 {
            write!(f, " __")?;
        }
        if self.arity == 2 {
            write!(f, " [{}] __", self.preps.join("/"))?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Predicate {
    InInventory { item: String },
    InRoom { room: String },
    Event { verb: String, object: String },
    Flag { flag: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsRule {
    pub label: String,
    pub points: f64,
    pub when: Predicate,
    /// Rules scoped to one persona count only for that persona's score.
    #[serde(default)]
    pub persona: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    pub game: GameInfo,
    pub rooms: Vec<Room>,
    #[serde(default)]
    pub objects: Vec<ObjectSpec>,
    pub templates: Vec<ActionTemplate>,
    pub win: Predicate,
    #[serde(default)]
    pub cs: Vec<CsRule>,
}

macro_rules! asset_game {
    ($name:literal) => {
        ($name, include_str!(concat!("../../assets/games/", $name, ".game")))
    };
}

/// Game specs compiled into the crate, by id.
pub const SHIPPED_GAMES: &[(&str, &str)] = &[
    asset_game!("905"),
    asset_game!("shopping"),
    asset_game!("see_doctor"),
    asset_game!("light_gold"),
];

impl GameSpec {
    /// Parses and validates (structure plus solvability in debug builds).
    pub fn parse(text: &str) -> Result<Self, GameError> {
        let mut spec: GameSpec = toml::from_str(text).map_err(|e| GameError::Parse(e.to_string()))?;
        spec.canonicalize();
        spec.validate()?;
        if cfg!(debug_assertions) {
            spec.validate_solvable()?;
        }
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GameError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// One of the shipped games (`905`, `shopping`, `see_doctor`, `light_gold`).
    pub fn shipped(id: &str) -> Result<Self, GameError> {
        let (_, text) = SHIPPED_GAMES
            .iter()
            .find(|(name, _)| *name == id)
            .ok_or_else(|| GameError::UnknownGame(id.to_string()))?;
        Self::parse(text)
    }

    /// Shipped id, or else a path to a `.game` file.
    pub fn resolve(id_or_path: &str) -> Result<Self, GameError> {
        if SHIPPED_GAMES.iter().any(|(name, _)| *name == id_or_path) {
            Self::shipped(id_or_path)
        } else {
            Self::load(id_or_path)
        }
    }

    fn canonicalize(&mut self) {
        let c = |s: &mut String| *s = canonical_entity(s);
        c(&mut self.game.start);
        for room in &mut self.rooms {
            c(&mut room.name);
            for target in room.exits.values_mut() {
                c(target);
            }
            for key in room.locks.values_mut() {
                c(key);
            }
        }
        for obj in &mut self.objects {
            c(&mut obj.name);
            c(&mut obj.location);
            for a in &mut obj.actions {
                a.verb = a.verb.to_lowercase();
                a.target.as_mut().map(c);
                a.requires_items.iter_mut().for_each(c);
                a.consume_items.iter_mut().for_each(c);
                a.grant_items.iter_mut().for_each(c);
                a.reveal.iter_mut().for_each(c);
                for e in &mut a.log {
                    e.verb = e.verb.to_lowercase();
                    c(&mut e.object);
                }
            }
        }
        for t in &mut self.templates {
            t.verbs.iter_mut().for_each(|v| *v = v.to_lowercase());
            t.preps.iter_mut().for_each(|p| *p = p.to_lowercase());
        }
        let cp = |p: &mut Predicate| match p {
            Predicate::InInventory { item } => c(item),
            Predicate::InRoom { room } => c(room),
            Predicate::Event { verb, object } => {
                *verb = verb.to_lowercase();
                c(object);
            }
            Predicate::Flag { .. } => {}
        };
        cp(&mut self.win);
        for rule in &mut self.cs {
            cp(&mut rule.when);
            rule.persona = rule.persona.as_ref().map(|p| p.to_lowercase());
        }
    }

    pub fn room(&self, name: &str) -> Option<&Room> {
        self.rooms.iter().find(|r| r.name == name)
    }

    pub fn object(&self, name: &str) -> Option<&ObjectSpec> {
        self.objects.iter().find(|o| o.name == name)
    }

    /// Structural checks: names resolve, exits land in rooms, templates
    /// are well formed, the room graph is connected.
    pub fn validate(&self) -> Result<(), GameError> {
        let invalid = |msg: String| Err(GameError::Validation(msg));
        if self.rooms.is_empty() {
            return invalid("spec has no rooms".into());
        }
        if self.templates.is_empty() {
            return invalid("spec has no templates".into());
        }
        let rooms: BTreeSet<&str> = self.rooms.iter().map(|r| r.name.as_str()).collect();
        if rooms.len() != self.rooms.len() {
            return invalid("duplicate room name".into());
        }
        let objects: BTreeSet<&str> = self.objects.iter().map(|o| o.name.as_str()).collect();
        if objects.len() != self.objects.len() {
            return invalid("duplicate object name".into());
        }
        if let Some(clash) = objects.iter().find(|o| DIRECTIONS.contains(o)) {
            return invalid(format!("object `{clash}` shadows a direction"));
        }
        if !rooms.contains(self.game.start.as_str()) {
            return invalid(format!("start room `{}` does not exist", self.game.start));
        }
        if self.game.step_cap == 0 {
            return invalid("step cap must be positive".into());
        }
        for room in &self.rooms {
            for (dir, target) in &room.exits {
                if !DIRECTIONS.contains(&dir.as_str()) {
                    return invalid(format!("room `{}`: unknown direction `{dir}`", room.name));
                }
                if !rooms.contains(target.as_str()) {
                    return invalid(format!(
                        "room `{}`: exit {dir} leads to missing room `{target}`",
                        room.name
                    ));
                }
            }
            for (dir, key) in &room.locks {
                if !room.exits.contains_key(dir) {
                    return invalid(format!("room `{}`: lock on missing exit {dir}", room.name));
                }
                if !objects.contains(key.as_str()) {
                    return invalid(format!("room `{}`: lock key `{key}` is not an object", room.name));
                }
            }
        }
        let item = |name: &str| objects.contains(name);
        for obj in &self.objects {
            let loc = obj.location.as_str();
            if loc != INVENTORY && loc != NOWHERE && !rooms.contains(loc) {
                return invalid(format!("object `{}` placed in missing room `{loc}`", obj.name));
            }
            for a in &obj.actions {
                let refs = a
                    .requires_items
                    .iter()
                    .chain(&a.consume_items)
                    .chain(&a.grant_items)
                    .chain(&a.reveal)
                    .chain(a.target.iter());
                for r in refs {
                    if !item(r) {
                        return invalid(format!("object `{}`: action references unknown `{r}`", obj.name));
                    }
                }
                if !self.templates.iter().any(|t| t.verb() == a.verb) {
                    return invalid(format!(
                        "object `{}`: no template starts with verb `{}`",
                        obj.name, a.verb
                    ));
                }
            }
        }
        for t in &self.templates {
            if t.verbs.is_empty() || t.verbs.iter().any(|v| v.trim().is_empty()) {
                return invalid("template without verb".into());
            }
            if t.arity > 2 {
                return invalid(format!("template {t}: arity above 2"));
            }
            if (t.arity == 2) != !t.preps.is_empty() {
                return invalid(format!("template {t}: prepositions must accompany exactly two blanks"));
            }
        }
        let check_pred = |p: &Predicate| -> Result<(), GameError> {
            match p {
                Predicate::InInventory { item: i } if !item(i) => {
                    Err(GameError::Validation(format!("predicate names unknown item `{i}`")))
                }
                Predicate::InRoom { room } if !rooms.contains(room.as_str()) => {
                    Err(GameError::Validation(format!("predicate names unknown room `{room}`")))
                }
                _ => Ok(()),
            }
        };
        check_pred(&self.win)?;
        for rule in &self.cs {
            check_pred(&rule.when)?;
            if rule.points < 0.0 {
                return invalid(format!("cs rule `{}` has negative points", rule.label));
            }
        }
        // Connectivity over exits, ignoring direction and locks.
        let mut adj: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for room in &self.rooms {
            for target in room.exits.values() {
                adj.entry(&room.name).or_default().insert(target);
                adj.entry(target).or_default().insert(&room.name);
            }
        }
        let mut seen = BTreeSet::from([self.game.start.as_str()]);
        let mut queue = VecDeque::from([self.game.start.as_str()]);
        while let Some(r) = queue.pop_front() {
            for &n in adj.get(r).into_iter().flatten() {
                if seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        if seen.len() != rooms.len() {
            let missing: Vec<_> = rooms.difference(&seen).collect();
            return invalid(format!("rooms unreachable from start: {missing:?}"));
        }
        Ok(())
    }

    /// The win must be reachable within the step cap.
    pub fn validate_solvable(&self) -> Result<usize, GameError> {
        match super::search::shortest_win(self) {
            Some(path) if path.len() <= self.game.step_cap as usize => Ok(path.len()),
            Some(path) => Err(GameError::Validation(format!(
                "shortest win takes {} steps, above the cap of {}",
                path.len(),
                self.game.step_cap
            ))),
            None => Err(GameError::Validation("win condition is unreachable".into())),
        }
    }

    pub fn templates(&self) -> &[ActionTemplate] {
        &self.templates
    }

    /// Closed decoding vocabulary: object names then exit directions.
    pub fn vocabulary(&self) -> Vec<String> {
        let mut words: Vec<String> = self.objects.iter().map(|o| o.name.clone()).collect();
        words.sort();
        let dirs: BTreeSet<&str> = self
            .rooms
            .iter()
            .flat_map(|r| r.exits.keys().map(String::as_str))
            .collect();
        // Keep the conventional compass order rather than alphabetical.
        words.extend(
            DIRECTIONS
                .iter()
                .filter(|d| dirs.contains(*d))
                .map(|d| d.to_string()),
        );
        words
    }

    /// Personas named by CS rules, sorted.
    pub fn personas(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.cs.iter().filter_map(|r| r.persona.as_ref()).collect();
        set.into_iter().cloned().collect()
    }

    /// Total CS points available to `persona` (`None`: unscoped rules).
    pub fn max_cs(&self, persona: Option<&str>) -> f64 {
        self.cs
            .iter()
            .filter(|r| r.persona.as_deref() == persona)
            .fold(0.0, |acc, r| acc + r.points)
    }
}
