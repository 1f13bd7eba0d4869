//! Knowledge-graph reward shaping for text-game agents.
//!
//! A story is turned into a small graph of frame triples; while an agent
//! plays, the graph it builds from observations is compared against the
//! story graph, and matching edges pay an intrinsic bonus on top of the
//! game score.

pub mod agent;
pub mod game;
pub mod harness;
pub mod kg;
pub mod reward;
pub mod scalar;
pub mod story;
pub mod world;

pub use scalar::Scalar;

/// Double-precision network parameters.
pub type Params = agent::PolicyParams<f64>;
pub type Rewards = reward::RewardConfig<f64>;
pub type Breakdown = reward::RewardBreakdown<f64>;
