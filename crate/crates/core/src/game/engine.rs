use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::spec::{GameSpec, ObjectAction, Predicate, INVENTORY, NOWHERE};
use super::GameError;
use crate::kg::canonical_entity;

/// Words the engine itself writes into feedback and descriptions.
pub const ENGINE_PHRASES: &str = "That's not a verb I recognise. You need to be more specific. \
You can't see any here. You can't the right now. You already have that. You can't take the. \
You aren't carrying that. You drop the. You take the. You see nothing special about the. \
You can't go that way. You need the to go that way. You go. You see and here. \
You are carrying nothing. You are carrying. *** You have won ***";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameMode {
    /// Only the win is scored; CS scores are hidden.
    #[default]
    Train,
    /// CS rules are tracked and may be queried.
    Test,
}

impl std::str::FromStr for GameMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(GameMode::Train),
            "test" => Ok(GameMode::Test),
            other => Err(format!("unknown mode `{other}` (expected train|test)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Event {
    pub verb: String,
    pub object: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GameState {
    pub room: String,
    /// Object -> room name, `inventory` or `nowhere`.
    pub locations: BTreeMap<String, String>,
    pub flags: BTreeSet<String>,
    pub events: BTreeSet<Event>,
    pub event_log: Vec<Event>,
    pub fired_cs: BTreeSet<usize>,
    pub steps_taken: u32,
    pub done: bool,
    pub won: bool,
    pub game_score: u32,
    pub seed: u64,
}

/// Part of the state that decides future transitions and the win.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DynamicsKey {
    room: String,
    locations: Vec<(String, String)>,
    flags: Vec<String>,
}

impl GameState {
    pub fn inventory(&self) -> BTreeSet<&str> {
        self.objects_at(INVENTORY)
    }

    pub fn objects_at(&self, place: &str) -> BTreeSet<&str> {
        self.locations
            .iter()
            .filter(|(_, loc)| loc.as_str() == place)
            .map(|(o, _)| o.as_str())
            .collect()
    }

    pub fn holds(&self, item: &str) -> bool {
        self.locations.get(item).is_some_and(|l| l == INVENTORY)
    }

    pub fn dynamics_key(&self) -> DynamicsKey {
        DynamicsKey {
            room: self.room.clone(),
            locations: self
                .locations
                .iter()
                .map(|(a, b)| (a.clone(), b.clone()))
                .collect(),
            flags: self.flags.iter().cloned().collect(),
        }
    }
}

/// What the engine did with the last command.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionRecord {
    /// First verb alias of the matched template.
    pub verb: String,
    pub objects: Vec<String>,
    pub success: bool,
}

/// Text observation plus the structured fields the world graph reads.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub desc: String,
    pub feedback: String,
    pub inv: String,
    pub prev_action: String,
    pub room: String,
    pub visible: Vec<String>,
    pub inventory: Vec<String>,
    pub exits: Vec<String>,
    pub action: Option<ActionRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub observation: Observation,
    pub score_delta: u32,
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedAction {
    pub template: usize,
    pub objects: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Game {
    spec: Arc<GameSpec>,
    mode: GameMode,
}

fn join_list(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

impl Game {
    pub fn new(spec: impl Into<Arc<GameSpec>>, mode: GameMode) -> Self {
        Game {
            spec: spec.into(),
            mode,
        }
    }

    pub fn spec(&self) -> &GameSpec {
        &self.spec
    }

    pub fn mode(&self) -> GameMode {
        self.mode
    }

    pub fn reset(&self, seed: u64) -> (GameState, Observation) {
        let state = GameState {
            room: self.spec.game.start.clone(),
            locations: self
                .spec
                .objects
                .iter()
                .map(|o| (o.name.clone(), o.location.clone()))
                .collect(),
            flags: BTreeSet::new(),
            events: BTreeSet::new(),
            event_log: Vec::new(),
            fired_cs: BTreeSet::new(),
            steps_taken: 0,
            done: false,
            won: false,
            game_score: 0,
            seed,
        };
        let obs = self.observe(&state, String::new(), String::new(), None);
        (state, obs)
    }

    /// Matches free text against the templates; longest verb alias wins.
    pub fn parse_action(&self, text: &str) -> Option<ParsedAction> {
        let text = text.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
        let mut best: Option<(usize, usize, &str)> = None;
        for (ti, t) in self.spec.templates.iter().enumerate() {
            for verb in &t.verbs {
                let rest = if text == *verb {
                    Some("")
                } else {
                    text.strip_prefix(verb.as_str()).and_then(|r| r.strip_prefix(' '))
                };
                if let Some(rest) = rest {
                    if best.is_none_or(|(_, len, _)| verb.len() > len) {
                        best = Some((ti, verb.len(), rest));
                    }
                }
            }
        }
        let (ti, _, rest) = best?;
        let t = &self.spec.templates[ti];
        let objects = match t.arity {
            0 if rest.is_empty() => vec![],
            1 if !rest.is_empty() => vec![canonical_entity(rest)],
            2 => {
                let (a, b) = t
                    .preps
                    .iter()
                    .find_map(|p| rest.split_once(&format!(" {p} ")))?;
                vec![canonical_entity(a), canonical_entity(b)]
            }
            _ => return None,
        };
        if objects.iter().any(String::is_empty) {
            return None;
        }
        Some(ParsedAction {
            template: ti,
            objects,
        })
    }

    fn holds(&self, state: &GameState, p: &Predicate) -> bool {
        match p {
            Predicate::InInventory { item } => state.holds(item),
            Predicate::InRoom { room } => state.room == *room,
            Predicate::Event { verb, object } => state.events.contains(&Event {
                verb: verb.clone(),
                object: object.clone(),
            }),
            Predicate::Flag { flag } => state.flags.contains(flag),
        }
    }

    pub fn is_won(&self, state: &GameState) -> bool {
        self.holds(state, &self.spec.win)
    }

    pub fn step(&self, state: &mut GameState, action_text: &str) -> Result<StepResult, GameError> {
        if state.done {
            return Err(GameError::SteppedAfterDone);
        }
        state.steps_taken += 1;
        let (record, feedback) = match self.parse_action(action_text) {
            None => (None, "That's not a verb I recognise.".to_string()),
            Some(parsed) => {
                let (success, feedback) = self.execute(state, &parsed);
                let record = ActionRecord {
                    verb: self.spec.templates[parsed.template].verb().to_string(),
                    objects: parsed.objects,
                    success,
                };
                (Some(record), feedback)
            }
        };
        for (i, rule) in self.spec.cs.iter().enumerate() {
            if !state.fired_cs.contains(&i) && self.holds(state, &rule.when) {
                state.fired_cs.insert(i);
            }
        }
        let mut score_delta = 0;
        let mut feedback = feedback;
        if !state.won && self.is_won(state) {
            state.won = true;
            state.done = true;
            score_delta = self.spec.game.win_score as u32;
            state.game_score += score_delta;
            feedback.push_str(" *** You have won ***");
        }
        if state.steps_taken >= self.spec.game.step_cap {
            state.done = true;
        }
        let observation = self.observe(state, feedback, action_text.trim().to_lowercase(), record);
        Ok(StepResult {
            observation,
            score_delta,
            done: state.done,
        })
    }

    fn log(state: &mut GameState, verb: &str, object: &str) {
        let e = Event {
            verb: verb.to_string(),
            object: object.to_string(),
        };
        state.events.insert(e.clone());
        state.event_log.push(e);
    }

    fn visible(state: &GameState, object: &str) -> bool {
        state
            .locations
            .get(object)
            .is_some_and(|l| *l == state.room || l == INVENTORY)
    }

    fn execute(&self, state: &mut GameState, action: &ParsedAction) -> (bool, String) {
        let verb = self.spec.templates[action.template].verb().to_string();
        let Some(first) = action.objects.first().cloned() else {
            return (false, "You need to be more specific.".into());
        };
        if verb == "go" {
            return self.go(state, &first);
        }
        let Some(obj) = self.spec.object(&first) else {
            return (false, format!("You can't see any {first} here."));
        };
        if !Self::visible(state, &first) {
            return (false, format!("You can't see any {first} here."));
        }
        let scripted: Vec<(usize, &ObjectAction)> = obj
            .actions
            .iter()
            .enumerate()
            .filter(|(_, a)| a.verb == verb && a.target.as_deref() == action.objects.get(1).map(String::as_str))
            .collect();
        if !scripted.is_empty() {
            for (idx, a) in scripted {
                let once_flag = format!("#once:{}:{idx}", obj.name);
                let ok = (!a.held || state.holds(&obj.name))
                    && !(a.once && state.flags.contains(&once_flag))
                    && a.target.as_ref().is_none_or(|t| Self::visible(state, t))
                    && a.requires_items.iter().all(|i| state.holds(i))
                    && a.requires_flags.iter().all(|f| state.flags.contains(f));
                if !ok {
                    continue;
                }
                if a.once {
                    state.flags.insert(once_flag);
                }
                if a.consume {
                    state.locations.insert(obj.name.clone(), NOWHERE.into());
                }
                for i in &a.consume_items {
                    state.locations.insert(i.clone(), NOWHERE.into());
                }
                for i in &a.grant_items {
                    state.locations.insert(i.clone(), INVENTORY.into());
                }
                for i in &a.reveal {
                    state.locations.insert(i.clone(), state.room.clone());
                }
                state.flags.extend(a.set_flags.iter().cloned());
                Self::log(state, &verb, &obj.name);
                for e in &a.log {
                    Self::log(state, &e.verb, &e.object);
                }
                return (true, a.feedback.clone());
            }
            return (false, format!("You can't {verb} the {} right now.", obj.name));
        }
        match verb.as_str() {
            "take" => {
                if state.holds(&obj.name) {
                    return (false, "You already have that.".into());
                }
                let portable = obj.portable
                    || obj.portable_when.as_ref().is_some_and(|f| state.flags.contains(f));
                if !portable {
                    return (false, format!("You can't take the {}.", obj.name));
                }
                state.locations.insert(obj.name.clone(), INVENTORY.into());
                Self::log(state, "take", &obj.name);
                (true, format!("You take the {}.", obj.name))
            }
            "drop" => {
                if !state.holds(&obj.name) {
                    return (false, "You aren't carrying that.".into());
                }
                state.locations.insert(obj.name.clone(), state.room.clone());
                Self::log(state, "drop", &obj.name);
                (true, format!("You drop the {}.", obj.name))
            }
            "examine" => {
                Self::log(state, "examine", &obj.name);
                let text = if obj.description.is_empty() {
                    format!("You see nothing special about the {}.", obj.name)
                } else {
                    obj.description.clone()
                };
                (true, text)
            }
            _ => (false, format!("You can't {verb} the {}.", obj.name)),
        }
    }

    fn go(&self, state: &mut GameState, dir: &str) -> (bool, String) {
        let room = self.spec.room(&state.room).expect("state room exists");
        let Some(target) = room.exits.get(dir) else {
            return (false, "You can't go that way.".into());
        };
        if let Some(key) = room.locks.get(dir) {
            if !state.holds(key) {
                return (false, format!("You need the {key} to go that way."));
            }
        }
        state.room = target.clone();
        Self::log(state, "go", dir);
        (true, format!("You go {dir}."))
    }

    fn observe(
        &self,
        state: &GameState,
        feedback: String,
        prev_action: String,
        action: Option<ActionRecord>,
    ) -> Observation {
        let room = self.spec.room(&state.room).expect("state room exists");
        let visible: Vec<String> = state.objects_at(&state.room).into_iter().map(String::from).collect();
        let inventory: Vec<String> = state.inventory().into_iter().map(String::from).collect();
        let mut desc = room.description.trim().to_string();
        if !visible.is_empty() {
            desc.push_str(&format!(" You see {} here.", join_list(&visible)));
        }
        let inv = if inventory.is_empty() {
            "You are carrying nothing.".to_string()
        } else {
            format!("You are carrying {}.", join_list(&inventory))
        };
        Observation {
            desc,
            feedback: feedback.trim().to_string(),
            inv,
            prev_action,
            room: state.room.clone(),
            visible,
            inventory,
            exits: room.exits.keys().cloned().collect(),
            action,
        }
    }

    fn rule_applies(&self, persona: Option<&str>) -> impl Fn(&(usize, &super::spec::CsRule)) -> bool + '_ {
        let persona = persona.map(str::to_string);
        move |(_, r)| r.persona == persona
    }

    /// CS points from rules without a persona. Test mode only.
    pub fn cs_score(&self, state: &GameState) -> Result<f64, GameError> {
        self.persona_cs_score(state, None)
    }

    pub fn persona_cs_score(&self, state: &GameState, persona: Option<&str>) -> Result<f64, GameError> {
        if self.mode != GameMode::Test {
            return Err(GameError::QueriedInTrainingMode);
        }
        if let Some(p) = persona {
            if !self.spec.personas().iter().any(|q| q == p) {
                return Err(GameError::UnknownPersona(p.to_string()));
            }
        }
        Ok(self
            .spec
            .cs
            .iter()
            .enumerate()
            .filter(self.rule_applies(persona))
            .filter(|(i, _)| state.fired_cs.contains(i))
            .fold(0.0, |acc, (_, r)| acc + r.points))
    }
}
