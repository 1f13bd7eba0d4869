//! Actor-critic agent: observation and graph encoders, attention fusion,
//! a template-then-objects decoder, and the A2C learner.

pub mod a2c;
pub mod fusion;
pub mod gat;
pub mod gradcheck;
pub mod gru;
pub mod policy;
pub mod tensor;
pub mod vocab;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{ActionTemplate, GameSpec, Observation};
use crate::scalar::Scalar;
use crate::story::FrameLexicon;
use crate::world::WorldKgState;

pub use a2c::{a2c_update, n_step_returns, Adam, Hyperparams, LossComponents, TrainItem};
pub use gat::GraphInput;
pub use policy::{Decision, NetInput, PolicyParams, COMPONENTS};
pub use vocab::{relation_token, Vocab};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("loss or gradient became non-finite")]
    NonFiniteLoss,
    #[error("parameters became non-finite after an update")]
    NonFiniteParams,
    #[error("invalid hyperparameters: {0}")]
    Hyperparams(String),
    #[error("checkpoint was trained on `{trained}`, not `{requested}`")]
    GameMismatch { trained: String, requested: String },
    #[error("malformed checkpoint: {0}")]
    Checkpoint(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// How the decoder turns a distribution into a choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decoding {
    Sample,
    /// Argmax; exact ties are broken by the agent's generator.
    Greedy,
}

fn sample_index<S: Scalar>(p: &[S], rng: &mut impl Rng) -> usize {
    let u = S::lit(rng.gen::<f64>());
    let mut acc = S::zero();
    let mut last = 0;
    for (i, &pi) in p.iter().enumerate() {
        if pi > S::zero() {
            acc = acc + pi;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

fn argmax_index<S: Scalar>(p: &[S], rng: &mut impl Rng) -> usize {
    let best = p.iter().copied().fold(S::neg_infinity(), S::max);
    let ties: Vec<usize> = (0..p.len()).filter(|&i| p[i] == best).collect();
    ties[rng.gen_range(0..ties.len())]
}

/// Network, vocabularies and learner state for one game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub game_id: String,
    pub hyper: Hyperparams,
    pub vocab: Vocab,
    /// Closed object vocabulary of the decoder.
    pub objects: Vec<String>,
    pub templates: Vec<ActionTemplate>,
    pub params: PolicyParams<f64>,
    pub adam: Adam<f64>,
    pub rng: ChaCha8Rng,
    pub updates: u64,
}

impl Agent {
    pub fn new(spec: &GameSpec, lexicon: &FrameLexicon, hyper: Hyperparams, seed: u64) -> Result<Self, AgentError> {
        hyper.validate().map_err(AgentError::Hyperparams)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vocab = Vocab::for_game(spec, lexicon);
        let objects = spec.vocabulary();
        let templates = spec.templates().to_vec();
        let params = PolicyParams::new(hyper.dim, vocab.len(), templates.len(), objects.len(), &mut rng);
        let adam = Adam::new(&params);
        Ok(Agent {
            game_id: spec.game.id.clone(),
            hyper,
            vocab,
            objects,
            templates,
            params,
            adam,
            rng,
            updates: 0,
        })
    }

    pub fn arities(&self) -> Vec<u8> {
        self.templates.iter().map(|t| t.arity).collect()
    }

    /// Tokenised observation, the world graph as an entity/relation node
    /// graph, and the object mask (decoder entries named in the graph).
    pub fn build_input(&self, obs: &Observation, world: &WorldKgState) -> NetInput {
        let comps = [
            self.vocab.tokenize(&obs.desc),
            self.vocab.tokenize(&obs.feedback),
            self.vocab.tokenize(&obs.inv),
            self.vocab.tokenize(&obs.prev_action),
        ];
        // Node keys: entities by name, relations by their label token.
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        let mut nodes = Vec::new();
        let mut edges: Vec<BTreeSet<usize>> = Vec::new();
        let mut node = |key: String, token: usize, nodes: &mut Vec<usize>, edges: &mut Vec<BTreeSet<usize>>| {
            *index.entry(key).or_insert_with(|| {
                let id = nodes.len();
                nodes.push(token);
                edges.push(BTreeSet::from([id]));
                id
            })
        };
        for t in &world.g_t {
            let s = node(t.subject().to_string(), self.vocab.id(t.subject()), &mut nodes, &mut edges);
            let rel = relation_token(t.relation());
            let r = node(rel.clone(), self.vocab.id(&rel), &mut nodes, &mut edges);
            let o = node(t.object().to_string(), self.vocab.id(t.object()), &mut nodes, &mut edges);
            for (a, b) in [(s, r), (r, o)] {
                edges[a].insert(b);
                edges[b].insert(a);
            }
        }
        let graph = GraphInput {
            nodes,
            neighbors: edges.into_iter().map(|e| e.into_iter().collect()).collect(),
        };
        let entities = world.entities();
        let mask = self.objects.iter().map(|o| entities.contains(o.as_str())).collect();
        NetInput { comps, graph, mask }
    }

    pub fn decide(&mut self, input: &NetInput, decoding: Decoding) -> Decision<f64> {
        let arities = self.arities();
        let rng = &mut self.rng;
        match decoding {
            Decoding::Sample => self.params.decide(input, &arities, |p| sample_index(p, rng)),
            Decoding::Greedy => self.params.decide(input, &arities, |p| argmax_index(p, rng)),
        }
    }

    pub fn render(&self, decision: &Decision<f64>) -> String {
        let objs: Vec<&str> = decision.objects.iter().map(|&o| self.objects[o].as_str()).collect();
        self.templates[decision.template].render(&objs)
    }

    pub fn update(&mut self, items: &[TrainItem<f64>]) -> Result<LossComponents, AgentError> {
        let loss = a2c_update(&mut self.params, &mut self.adam, items, &self.hyper)?;
        self.updates += 1;
        Ok(loss)
    }

    /// Re-seeds the decision generator (evaluation runs).
    pub fn reseed(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), AgentError> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer(file, self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, AgentError> {
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        Ok(serde_json::from_reader(file)?)
    }

    /// Fails unless the checkpoint was trained on `spec`.
    pub fn check_game(&self, spec: &GameSpec) -> Result<(), AgentError> {
        if self.game_id != spec.game.id || self.templates != spec.templates() || self.objects != spec.vocabulary() {
            return Err(AgentError::GameMismatch {
                trained: self.game_id.clone(),
                requested: spec.game.id.clone(),
            });
        }
        Ok(())
    }
}
