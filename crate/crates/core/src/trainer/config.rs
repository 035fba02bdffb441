use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::env::RewardParams;
use crate::error::{Error, Result};
use crate::sac::{EntropySettings, SacConfig};

/// How the training parameter value is chosen for each episode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RSelection {
    Uniform,
    RoundRobin,
}

/// The only section without defaults: `family` must always be given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    /// Family manifest; relative paths resolve against the config file.
    pub family: PathBuf,
    /// Optional finer family used only to evaluate predictions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prediction_family: Option<PathBuf>,
    #[serde(default = "default_initial_state")]
    pub initial_state: String,
    /// Prediction grid spacing; zero predicts at the training values.
    #[serde(default = "default_prediction_step")]
    pub prediction_step: f64,
    #[serde(default = "default_r_selection")]
    pub r_selection: RSelection,
}

fn default_initial_state() -> String {
    "1100".into()
}

fn default_prediction_step() -> f64 {
    0.01
}

fn default_r_selection() -> RSelection {
    RSelection::Uniform
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingSection {
    pub episodes: usize,
    pub max_gates: usize,
    /// Every `eval_ratio`-th episode acts deterministically; zero disables.
    pub eval_ratio: usize,
    pub runs: usize,
    pub include_eval_transitions: bool,
    /// Episodes between checkpoints; zero writes only the final one.
    pub checkpoint_every: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SacSection {
    pub lr_critic: f64,
    pub lr_actor: f64,
    pub lr_alpha_discrete: f64,
    pub lr_alpha_continuous: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub soft_update: f64,
    /// Blend targets as `soft_update·target + (1 − soft_update)·online`
    /// instead of the default slow-moving form.
    pub polyak_literal: bool,
    pub update_every: usize,
    pub random_steps: usize,
    pub gamma: f64,
    pub initial_alpha: f64,
    pub harmonics: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkSection {
    pub actor_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeaturizationSection {
    pub count: usize,
    pub interval: [f64; 2],
}

/// Every knob of a training run. Defaults are the four-qubit LiH
/// potential-energy-curve settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[derive(Default)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub system: SystemSection,
    #[serde(default)]
    pub training: TrainingSection,
    #[serde(default)]
    pub sac: SacSection,
    #[serde(default)]
    pub entropy: EntropySettings,
    #[serde(default)]
    pub network: NetworkSection,
    #[serde(default)]
    pub reward: RewardParams,
    #[serde(default)]
    pub featurization: FeaturizationSection,
}

impl Default for SystemSection {
    fn default() -> Self {
        SystemSection {
            family: PathBuf::from("family.toml"),
            prediction_family: None,
            initial_state: default_initial_state(),
            prediction_step: default_prediction_step(),
            r_selection: default_r_selection(),
        }
    }
}

impl Default for TrainingSection {
    fn default() -> Self {
        TrainingSection {
            episodes: 40_000,
            max_gates: 12,
            eval_ratio: 10,
            runs: 12,
            include_eval_transitions: true,
            checkpoint_every: 0,
        }
    }
}

impl Default for SacSection {
    fn default() -> Self {
        SacSection {
            lr_critic: 1e-3,
            lr_actor: 1e-3,
            lr_alpha_discrete: 3e-3,
            lr_alpha_continuous: 3e-3,
            batch_size: 512,
            buffer_capacity: 36_000,
            soft_update: 0.005,
            polyak_literal: false,
            update_every: 50,
            random_steps: 1200,
            gamma: 1.0,
            initial_alpha: 1.0,
            harmonics: 2,
        }
    }
}

impl Default for EntropySettings {
    fn default() -> Self {
        EntropySettings {
            decay_discrete: 1.0,
            decay_continuous: 2.0,
            deduction_discrete: 0.1,
            deduction_continuous: 0.05,
            end_discrete: 0.5,
            end_continuous: -2.0,
        }
    }
}

impl Default for NetworkSection {
    fn default() -> Self {
        NetworkSection {
            actor_hidden: vec![256, 128],
            critic_hidden: vec![256, 128, 128],
        }
    }
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams {
            m: 30,
            k: 50,
            sigma_min: 0.01,
            c_exp: 5.0,
            c_lin: 1.0,
            e0: -7.0,
        }
    }
}

impl Default for FeaturizationSection {
    fn default() -> Self {
        FeaturizationSection {
            count: 3,
            interval: [1.0, 4.0],
        }
    }
}


fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be positive and finite, got {v}")))
    }
}

fn finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, "must be finite"))
    }
}

fn at_least(field: &str, v: usize, min: usize) -> Result<()> {
    if v >= min {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be at least {min}, got {v}")))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
                .unwrap_or(0);
            Error::Parse {
                line,
                msg: e.message().to_string(),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config file, resolving family paths against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = RunConfig::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.system.family = base.join(&cfg.system.family);
        cfg.system.prediction_family = cfg.system.prediction_family.map(|p| base.join(p));
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.system;
        if s.initial_state.is_empty() || !s.initial_state.chars().all(|c| c == '0' || c == '1') {
            return Err(Error::config(
                "system.initial_state",
                "must be a nonempty string of 0 and 1",
            ));
        }
        if !(s.prediction_step >= 0.0 && s.prediction_step.is_finite()) {
            return Err(Error::config("system.prediction_step", "must be nonnegative"));
        }

        let t = &self.training;
        at_least("training.episodes", t.episodes, 1)?;
        at_least("training.max_gates", t.max_gates, 1)?;
        at_least("training.runs", t.runs, 1)?;
        if t.eval_ratio == 1 {
            return Err(Error::config(
                "training.eval_ratio",
                "must be 0 (no evaluation episodes) or at least 2",
            ));
        }

        let q = &self.sac;
        positive("sac.lr_critic", q.lr_critic)?;
        positive("sac.lr_actor", q.lr_actor)?;
        positive("sac.lr_alpha_discrete", q.lr_alpha_discrete)?;
        positive("sac.lr_alpha_continuous", q.lr_alpha_continuous)?;
        at_least("sac.batch_size", q.batch_size, 1)?;
        at_least("sac.buffer_capacity", q.buffer_capacity, q.batch_size)?;
        if !(0.0..=1.0).contains(&q.soft_update) {
            return Err(Error::config("sac.soft_update", "must lie in [0, 1]"));
        }
        at_least("sac.update_every", q.update_every, 1)?;
        if !(0.0..=1.0).contains(&q.gamma) {
            return Err(Error::config("sac.gamma", "must lie in [0, 1]"));
        }
        positive("sac.initial_alpha", q.initial_alpha)?;

        let e = &self.entropy;
        for (f, v) in [
            ("entropy.decay_discrete", e.decay_discrete),
            ("entropy.decay_continuous", e.decay_continuous),
            ("entropy.deduction_discrete", e.deduction_discrete),
            ("entropy.deduction_continuous", e.deduction_continuous),
            ("entropy.end_discrete", e.end_discrete),
            ("entropy.end_continuous", e.end_continuous),
        ] {
            finite(f, v)?;
        }
        if e.decay_discrete < 0.0 || e.decay_continuous < 0.0 {
            return Err(Error::config("entropy.decay_discrete", "decay factors must be nonnegative"));
        }

        for (f, layers) in [
            ("network.actor_hidden", &self.network.actor_hidden),
            ("network.critic_hidden", &self.network.critic_hidden),
        ] {
            if layers.contains(&0) {
                return Err(Error::config(f, "layer widths must be positive"));
            }
        }

        let r = &self.reward;
        at_least("reward.m", r.m, 1)?;
        at_least("reward.k", r.k, 1)?;
        positive("reward.sigma_min", r.sigma_min)?;
        finite("reward.c_exp", r.c_exp)?;
        finite("reward.c_lin", r.c_lin)?;
        finite("reward.e0", r.e0)?;

        let f = &self.featurization;
        if f.count > 0 && !(f.interval[0] < f.interval[1]) {
            return Err(Error::config(
                "featurization.interval",
                "lower bound must be below upper bound",
            ));
        }
        Ok(())
    }

    pub fn sac_config(&self) -> SacConfig {
        SacConfig {
            actor_hidden: self.network.actor_hidden.clone(),
            critic_hidden: self.network.critic_hidden.clone(),
            harmonics: self.sac.harmonics,
            lr_actor: self.sac.lr_actor,
            lr_critic: self.sac.lr_critic,
            lr_alpha_discrete: self.sac.lr_alpha_discrete,
            lr_alpha_continuous: self.sac.lr_alpha_continuous,
            gamma: self.sac.gamma,
            initial_alpha: self.sac.initial_alpha,
        }
    }

    /// Weight kept on the old target parameters in each blend.
    pub fn target_keep(&self) -> f64 {
        if self.sac.polyak_literal {
            self.sac.soft_update
        } else {
            1.0 - self.sac.soft_update
        }
    }
}
