use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{RSelection, RunConfig};
use crate::env::{CircuitEnv, GaussianFeaturizer, HybridAction, Observation, RewardEngine};
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianFamily;
use crate::sac::{ReplayBuffer, SacAgent, TargetEntropySchedule, UpdateStats};
use crate::sim::Circuit;

/// Precision the trainer runs its networks in.
pub type Net = f32;

/// Summary of one finished episode.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeRecord {
    pub index: usize,
    pub r: f64,
    /// Energy of the start state.
    pub initial_energy: f64,
    /// Energy after each of the `T` gates.
    pub energies: Vec<f64>,
    pub circuit: Circuit,
    pub eval: bool,
    /// Sum of rewards under the reward buffers at episode end.
    pub ret: f64,
}

impl EpisodeRecord {
    pub fn final_energy(&self) -> f64 {
        *self.energies.last().unwrap_or(&self.initial_energy)
    }
}

pub(crate) fn to_net(obs: &Observation) -> Vec<Net> {
    obs.as_slice().iter().map(|v| *v as Net).collect()
}

pub fn featurizer_for(cfg: &RunConfig) -> Result<GaussianFeaturizer> {
    let f = &cfg.featurization;
    GaussianFeaturizer::new(f.count, f.interval[0], f.interval[1])
}

/// Environment for `family` under the run's start state, budget and
/// featurization.
pub fn build_env(cfg: &RunConfig, family: &HamiltonianFamily) -> Result<CircuitEnv> {
    if cfg.system.initial_state.len() != family.n_qubits() {
        return Err(Error::config(
            "system.initial_state",
            format!(
                "has {} qubits but the family has {}",
                cfg.system.initial_state.len(),
                family.n_qubits()
            ),
        ));
    }
    CircuitEnv::new(
        family,
        &cfg.system.initial_state,
        cfg.training.max_gates,
        featurizer_for(cfg)?,
    )
}

/// One training run, advanced an episode at a time.
pub struct Trainer {
    cfg: RunConfig,
    env: CircuitEnv,
    r_values: Vec<f64>,
    agent: SacAgent<Net>,
    engine: RewardEngine,
    buffer: ReplayBuffer,
    schedule: TargetEntropySchedule,
    rng: ChaCha8Rng,
    episode: usize,
    steps: usize,
    updates: usize,
    last_stats: Option<UpdateStats>,
}

impl Trainer {
    pub fn new(cfg: &RunConfig, family: &HamiltonianFamily, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let env = build_env(cfg, family)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_actions = env.actions().len();
        let agent = SacAgent::new(env.obs_size(), n_actions, &cfg.sac_config(), &mut rng)?;
        let schedule = TargetEntropySchedule::new(
            n_actions,
            &cfg.entropy,
            (cfg.training.episodes * cfg.training.max_gates) as f64,
        )?;
        Ok(Trainer {
            buffer: ReplayBuffer::new(cfg.sac.buffer_capacity, env.obs_size())?,
            engine: RewardEngine::new(cfg.reward.clone())?,
            r_values: family.r_values(),
            cfg: cfg.clone(),
            env,
            agent,
            schedule,
            rng,
            episode: 0,
            steps: 0,
            updates: 0,
            last_stats: None,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn agent(&self) -> &SacAgent<Net> {
        &self.agent
    }

    pub fn agent_mut(&mut self) -> &mut SacAgent<Net> {
        &mut self.agent
    }

    pub fn engine(&self) -> &RewardEngine {
        &self.engine
    }

    pub fn engine_mut(&mut self) -> &mut RewardEngine {
        &mut self.engine
    }

    pub fn env(&self) -> &CircuitEnv {
        &self.env
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn schedule(&self) -> &TargetEntropySchedule {
        &self.schedule
    }

    pub fn episodes_done(&self) -> usize {
        self.episode
    }

    pub fn steps_done(&self) -> usize {
        self.steps
    }

    pub fn updates_done(&self) -> usize {
        self.updates
    }

    pub fn last_update(&self) -> Option<UpdateStats> {
        self.last_stats
    }

    pub fn is_finished(&self) -> bool {
        self.episode >= self.cfg.training.episodes
    }

    /// Whether episode `index` acts deterministically.
    pub fn is_eval_episode(&self, index: usize) -> bool {
        let ratio = self.cfg.training.eval_ratio;
        ratio > 0 && (index + 1).is_multiple_of(ratio)
    }

    fn next_r(&mut self) -> f64 {
        match self.cfg.system.r_selection {
            RSelection::Uniform => self.r_values[self.rng.gen_range(0..self.r_values.len())],
            RSelection::RoundRobin => self.r_values[self.episode % self.r_values.len()],
        }
    }

    fn choose(&mut self, obs: &Observation, eval: bool) -> Result<HybridAction> {
        let x = to_net(obs);
        if eval {
            return self.agent.actor.deterministic_action(&x);
        }
        if self.steps < self.cfg.sac.random_steps {
            let d = self.rng.gen_range(0..self.env.actions().len());
            let c = PI - 2.0 * PI * self.rng.gen::<f64>();
            return Ok(HybridAction { d, c });
        }
        Ok(self.agent.actor.sample_action(&x, &mut self.rng)?.0)
    }

    fn maybe_update(&mut self) -> Result<()> {
        let sac = &self.cfg.sac;
        if !self.steps.is_multiple_of(sac.update_every)
            || self.steps < sac.random_steps
            || self.buffer.len() < sac.batch_size
        {
            return Ok(());
        }
        let keep = self.cfg.target_keep();
        for _ in 0..sac.update_every {
            let batch = self
                .buffer
                .sample::<Net, _>(sac.batch_size, &mut self.rng, &self.engine)?;
            let targets = self.schedule.targets(self.steps as f64);
            self.last_stats = Some(self.agent.update(&batch, &mut self.rng, targets, keep)?);
            self.updates += 1;
        }
        Ok(())
    }

    pub fn run_episode(&mut self) -> Result<EpisodeRecord> {
        if self.is_finished() {
            return Err(Error::Invalid("all training episodes are done".into()));
        }
        let index = self.episode;
        let eval = self.is_eval_episode(index);
        let r = self.next_r();
        let mut obs = self.env.reset(r)?;
        let initial_energy = self.env.energy().expect("environment was reset");
        let mut energies = Vec::with_capacity(self.cfg.training.max_gates);
        loop {
            let action = self.choose(&obs, eval)?;
            let tr = self.env.step(action)?;
            self.engine.observe(r, tr.e_after);
            if !eval || self.cfg.training.include_eval_transitions {
                self.buffer.push(&tr)?;
            }
            energies.push(tr.e_after);
            self.steps += 1;
            self.maybe_update()?;
            obs = tr.next_obs;
            if tr.done {
                break;
            }
        }
        let mut ret = 0.0;
        let mut prev = initial_energy;
        for e in &energies {
            ret += self.engine.reward_for(r, prev, *e);
            prev = *e;
        }
        self.episode += 1;
        Ok(EpisodeRecord {
            index,
            r,
            initial_energy,
            energies,
            circuit: self.env.state().expect("episode ran").circuit.clone(),
            eval,
            ret,
        })
    }
}

/// Runs every episode, handing each record to `on_episode`.
pub fn train(
    cfg: &RunConfig,
    family: &HamiltonianFamily,
    seed: u64,
    mut on_episode: impl FnMut(&Trainer, &EpisodeRecord) -> Result<()>,
) -> Result<Trainer> {
    let mut trainer = Trainer::new(cfg, family, seed)?;
    while !trainer.is_finished() {
        let rec = trainer.run_episode()?;
        on_episode(&trainer, &rec)?;
    }
    Ok(trainer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::PauliSum;

    fn tiny_cfg() -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.system.initial_state = "00".into();
        cfg.training.episodes = 30;
        cfg.training.max_gates = 3;
        cfg.sac.batch_size = 8;
        cfg.sac.buffer_capacity = 64;
        cfg.sac.update_every = 5;
        cfg.sac.random_steps = 20;
        cfg.network.actor_hidden = vec![8];
        cfg.network.critic_hidden = vec![8];
        cfg.featurization.count = 2;
        cfg.featurization.interval = [0.0, 1.0];
        cfg.reward.e0 = 0.0;
        cfg
    }

    fn family() -> HamiltonianFamily {
        let samples = [0.0, 1.0]
            .into_iter()
            .map(|r| (r, PauliSum::parse(&format!("{r} ZI\n0.5 IZ\n")).unwrap()))
            .collect();
        HamiltonianFamily::new(0.0, 1.0, samples).unwrap()
    }

    #[test]
    fn eval_cadence_and_lengths() {
        let mut evals = Vec::new();
        let t = train(&tiny_cfg(), &family(), 1, |_, rec| {
            assert_eq!(rec.energies.len(), 3);
            if rec.eval {
                evals.push(rec.index);
            }
            Ok(())
        })
        .unwrap();
        assert_eq!(evals, vec![9, 19, 29]);
        assert_eq!(t.steps_done(), 90);
        assert!(t.updates_done() > 0);
    }

    #[test]
    fn identical_seeds_give_identical_logs() {
        let run = |seed| {
            let mut log = Vec::new();
            train(&tiny_cfg(), &family(), seed, |_, rec| {
                log.push(rec.clone());
                Ok(())
            })
            .unwrap();
            log
        };
        assert_eq!(run(5), run(5));
    }

    #[test]
    fn start_state_size_is_checked() {
        let mut cfg = tiny_cfg();
        cfg.system.initial_state = "000".into();
        let err = Trainer::new(&cfg, &family(), 0).err().unwrap();
        assert_eq!(err.category(), "config");
    }
}
