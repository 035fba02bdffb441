//! Circuit-construction decision process: observations, the hybrid action
//! table, deterministic stepping and the curriculum reward.

mod actions;
mod circuit_env;
mod features;
mod reward;

pub use actions::{ActionTable, HybridAction};
pub use circuit_env::{CircuitEnv, EnvState, Observation, Transition};
pub use features::GaussianFeaturizer;
pub use reward::{RewardEngine, RewardParams, MAX_EXPONENT};
