//! Soft actor-critic over hybrid discrete-continuous actions.

mod agent;
mod buffer;
mod critic;
mod policy;
mod temperature;

pub use agent::{
    critic_loss_and_grad, policy_loss_and_grad, standard_normals, PolicyLoss, SacAgent,
    SacConfig, SoftValues, UpdateStats,
};
pub use buffer::{Batch, ReplayBuffer};
pub use critic::{fourier_basis, AngleTrig, FourierCritic};
pub use policy::{
    squash_angle, squash_log_std, squashed_log_density, Actor, PolicyEval, ANGLE_BOUND, LOG_STD_MAX,
    LOG_STD_MIN,
};
pub use temperature::{
    max_squashed_entropy, squashed_gaussian_entropy, temperature_loss, EntropySettings,
    Temperatures, TargetEntropySchedule,
};
