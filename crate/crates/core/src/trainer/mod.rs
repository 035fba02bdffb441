//! Training runs, curve prediction, statistics and run artifacts.

mod artifacts;
mod config;
mod pec;
mod run;
mod stats;

pub use artifacts::{
    census_csv, ensure_dir, load_agent, read_episode_log, read_pec, read_reference,
    save_checkpoint, write_census, write_pec, EpisodeLog, EpisodeRow, PecRow, ReferenceRow,
};
pub use config::{
    FeaturizationSection, NetworkSection, RSelection, RunConfig, SacSection, SystemSection,
    TrainingSection,
};
pub use pec::{
    census_row, circuit_census, deterministic_rollout, grid_for, predict_pec, prediction_grid, CensusRow,
    PecPoint, PecResult,
};
pub use run::{build_env, featurizer_for, train, EpisodeRecord, Net, Trainer};
pub use stats::{
    asymmetric_spread, cost_per_parameter, mean_abs_error, moving_average, pec_statistics,
    round_to, AsymmetricSpread, PecSummary,
};
