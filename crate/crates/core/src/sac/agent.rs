use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::buffer::Batch;
use super::critic::{AngleTrig, FourierCritic};
use super::policy::{Actor, PolicyEval, ANGLE_BOUND, LOG_STD_MAX, LOG_STD_MIN};
use super::temperature::Temperatures;
use crate::error::{Error, Result};
use crate::nn::{Adam, Mlp, Scalar};

/// Network shapes, learning rates and discounting for one agent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SacConfig {
    pub actor_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    /// Number of angle harmonics in the critic head.
    pub harmonics: usize,
    pub lr_actor: f64,
    pub lr_critic: f64,
    pub lr_alpha_discrete: f64,
    pub lr_alpha_continuous: f64,
    pub gamma: f64,
    pub initial_alpha: f64,
}

impl Default for SacConfig {
    fn default() -> Self {
        SacConfig {
            actor_hidden: vec![256, 128],
            critic_hidden: vec![256, 128, 128],
            harmonics: 2,
            lr_actor: 1e-3,
            lr_critic: 1e-3,
            lr_alpha_discrete: 3e-3,
            lr_alpha_continuous: 3e-3,
            gamma: 1.0,
            initial_alpha: 1.0,
        }
    }
}

/// Soft state values of the next states under the current policy, using
/// the smaller target critic and each target critic on its own.
#[derive(Clone, Debug)]
pub struct SoftValues {
    pub clipped: Vec<f64>,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct PolicyLoss<T> {
    pub loss: f64,
    pub grad: Vec<T>,
    pub entropy_discrete: f64,
    pub entropy_continuous: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct UpdateStats {
    pub critic_loss: f64,
    pub policy_loss: f64,
    pub alpha_discrete: f64,
    pub alpha_continuous: f64,
    pub entropy_discrete: f64,
    pub entropy_continuous: f64,
}

pub fn standard_normals<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Mean squared Bellman error `½(Q(s, d, c) − y)²` of one critic against fixed
/// targets, with its parameter gradient.
pub fn critic_loss_and_grad<T: Scalar>(
    critic: &FourierCritic<T>,
    batch: &Batch<T>,
    y: &[f64],
) -> Result<(f64, Vec<T>)> {
    let b = batch.size;
    if b == 0 {
        return Err(Error::Invalid("empty batch".into()));
    }
    let tape = critic.net.forward_batch(&batch.obs, b)?;
    let out = tape.output();
    let width = critic.net.output_size();
    let nb = critic.n_basis();
    let mut dy = vec![T::zero(); b * width];
    let mut phi = Vec::with_capacity(nb);
    let mut loss = 0.0;
    for i in 0..b {
        let row = &out[i * width..(i + 1) * width];
        let q = critic.value(row, batch.d[i], batch.c[i]);
        let err = q - y[i];
        loss += 0.5 * err * err;
        super::critic::fourier_basis(batch.c[i], critic.harmonics(), &mut phi);
        let off = i * width + batch.d[i] * nb;
        for (k, f) in phi.iter().enumerate() {
            dy[off + k] = T::of(err * f / b as f64);
        }
    }
    let mut grad = vec![T::zero(); critic.net.n_params()];
    critic.net.backward_batch(&tape, &dy, &mut grad, false)?;
    Ok((loss / b as f64, grad))
}

/// Batch-mean policy objective
/// `Σ_d p_d (α_d log p_d + α_c log π_c(c_d) − min_j Q_j(s, d, c_d))`
/// under the given reparameterization noise, with its gradient.
pub fn policy_loss_and_grad<T: Scalar>(
    actor: &Actor<T>,
    critics: &[FourierCritic<T>; 2],
    obs: &[T],
    batch: usize,
    eps: &[f64],
    alpha_discrete: f64,
    alpha_continuous: f64,
) -> Result<PolicyLoss<T>> {
    if batch == 0 {
        return Err(Error::Invalid("empty batch".into()));
    }
    let a = actor.n_actions();
    let tape = actor.net.forward_batch(obs, batch)?;
    let ev = actor.evaluate(tape.output(), eps);
    let q_out: Vec<Vec<T>> = critics
        .iter()
        .map(|c| c.net.forward_batch(obs, batch).map(|t| t.output().to_vec()))
        .collect::<Result<_>>()?;
    let width = critics[0].net.output_size();
    let scale = 1.0 / batch as f64;
    let ls_half_range = 0.5 * (LOG_STD_MAX - LOG_STD_MIN);

    let mut dy = vec![T::zero(); batch * 3 * a];
    let mut v = vec![0.0; a];
    let mut loss = 0.0;
    let (mut h_d, mut h_c) = (0.0, 0.0);
    for b in 0..batch {
        let rows = [
            &q_out[0][b * width..(b + 1) * width],
            &q_out[1][b * width..(b + 1) * width],
        ];
        let mut v_mean = 0.0;
        for d in 0..a {
            let k = b * a + d;
            let trig = AngleTrig::new(ev.angle[k]);
            let (q0, s0) = critics[0].value_and_slope(rows[0], d, trig);
            let (q1, s1) = critics[1].value_and_slope(rows[1], d, trig);
            let (q_min, slope) = if q0 <= q1 { (q0, s0) } else { (q1, s1) };
            v[d] = alpha_discrete * ev.log_probs[k] + alpha_continuous * ev.angle_log_density[k]
                - q_min;
            v_mean += ev.probs[k] * v[d];

            let tanh_u = ev.u[k].tanh();
            let sigma = ev.log_std[k].exp();
            let dc_du = ANGLE_BOUND * (1.0 - tanh_u * tanh_u);
            let dq_du = slope * dc_du;
            let dlp_dmean = 2.0 * tanh_u;
            let dlp_dls = -1.0 + 2.0 * tanh_u * sigma * ev.eps[k];
            let p = ev.probs[k];
            let g_mean = p * (alpha_continuous * dlp_dmean - dq_du);
            let g_ls = p * (alpha_continuous * dlp_dls - dq_du * sigma * ev.eps[k]);
            let t = ev.raw_log_std[k].tanh();
            let dls_draw = ls_half_range * (1.0 - t * t);
            dy[b * 3 * a + a + d] = T::of(g_mean * scale);
            dy[b * 3 * a + 2 * a + d] = T::of(g_ls * dls_draw * scale);
        }
        for d in 0..a {
            let k = b * a + d;
            dy[b * 3 * a + d] = T::of(ev.probs[k] * (v[d] - v_mean) * scale);
        }
        loss += v_mean;
        h_d += ev.discrete_entropy(b);
        h_c += ev.continuous_entropy(b);
    }
    let mut grad = vec![T::zero(); actor.net.n_params()];
    actor.net.backward_batch(&tape, &dy, &mut grad, false)?;
    Ok(PolicyLoss {
        loss: loss * scale,
        grad,
        entropy_discrete: h_d * scale,
        entropy_continuous: h_c * scale,
    })
}

/// Hybrid soft actor-critic with twin critics and their slow copies.
#[derive(Clone, Debug)]
pub struct SacAgent<T> {
    pub actor: Actor<T>,
    pub critics: [FourierCritic<T>; 2],
    pub targets: [FourierCritic<T>; 2],
    pub temps: Temperatures,
    actor_opt: Adam<T>,
    critic_opts: [Adam<T>; 2],
    gamma: f64,
}

impl<T: Scalar> SacAgent<T> {
    pub fn new<R: Rng + ?Sized>(
        obs_size: usize,
        n_actions: usize,
        cfg: &SacConfig,
        rng: &mut R,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&cfg.gamma) {
            return Err(Error::Invalid(format!("discount {} outside [0, 1]", cfg.gamma)));
        }
        let actor = Actor::new(obs_size, &cfg.actor_hidden, n_actions, rng)?;
        let critics = [
            FourierCritic::new(obs_size, &cfg.critic_hidden, n_actions, cfg.harmonics, rng)?,
            FourierCritic::new(obs_size, &cfg.critic_hidden, n_actions, cfg.harmonics, rng)?,
        ];
        let targets = critics.clone();
        let n_actor = actor.net.n_params();
        let n_critic = critics[0].net.n_params();
        Ok(SacAgent {
            actor,
            targets,
            critics,
            temps: Temperatures::new(cfg.initial_alpha, cfg.lr_alpha_discrete, cfg.lr_alpha_continuous)?,
            actor_opt: Adam::new(n_actor, cfg.lr_actor),
            critic_opts: [Adam::new(n_critic, cfg.lr_critic), Adam::new(n_critic, cfg.lr_critic)],
            gamma: cfg.gamma,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n_actions(&self) -> usize {
        self.actor.n_actions()
    }

    /// Soft values of `next_obs` with one angle sample per placement, shared
    /// by both target critics.
    pub fn soft_values(&self, next_obs: &[T], batch: usize, eps: &[f64]) -> Result<SoftValues> {
        let a = self.n_actions();
        let ev: PolicyEval = self.actor.evaluate_obs(next_obs, batch, eps)?;
        let outs: Vec<Vec<T>> = self
            .targets
            .iter()
            .map(|c| c.net.forward_batch(next_obs, batch).map(|t| t.output().to_vec()))
            .collect::<Result<_>>()?;
        let width = self.targets[0].net.output_size();
        let (ad, ac) = (self.temps.alpha_discrete(), self.temps.alpha_continuous());
        let mut sv = SoftValues {
            clipped: Vec::with_capacity(batch),
            first: Vec::with_capacity(batch),
            second: Vec::with_capacity(batch),
        };
        for b in 0..batch {
            let (mut vm, mut v0, mut v1) = (0.0, 0.0, 0.0);
            for d in 0..a {
                let k = b * a + d;
                let trig = AngleTrig::new(ev.angle[k]);
                let q0 = self.targets[0].value_and_slope(&outs[0][b * width..(b + 1) * width], d, trig).0;
                let q1 = self.targets[1].value_and_slope(&outs[1][b * width..(b + 1) * width], d, trig).0;
                let bonus = -ad * ev.log_probs[k] - ac * ev.angle_log_density[k];
                let p = ev.probs[k];
                vm += p * (q0.min(q1) + bonus);
                v0 += p * (q0 + bonus);
                v1 += p * (q1 + bonus);
            }
            sv.clipped.push(vm);
            sv.first.push(v0);
            sv.second.push(v1);
        }
        Ok(sv)
    }

    /// Regression targets `y = r + γ(1 − done)·V(s′)`.
    pub fn critic_targets(&self, batch: &Batch<T>, eps: &[f64]) -> Result<Vec<f64>> {
        let sv = self.soft_values(&batch.next_obs, batch.size, eps)?;
        Ok((0..batch.size)
            .map(|i| {
                let boot = if batch.done[i] { 0.0 } else { self.gamma * sv.clipped[i] };
                batch.reward[i] + boot
            })
            .collect())
    }

    /// One optimizer step on both online critics; returns their mean loss.
    pub fn critic_update<R: Rng + ?Sized>(&mut self, batch: &Batch<T>, rng: &mut R) -> Result<f64> {
        if batch.size == 0 {
            return Err(Error::Invalid("empty batch".into()));
        }
        let eps = standard_normals(batch.size * self.n_actions(), rng);
        let y = self.critic_targets(batch, &eps)?;
        let mut total = 0.0;
        for j in 0..2 {
            let (loss, grad) = critic_loss_and_grad(&self.critics[j], batch, &y)?;
            self.critic_opts[j].step(self.critics[j].net.params_mut(), &grad)?;
            total += loss;
        }
        Ok(0.5 * total)
    }

    /// One optimizer step on the actor; returns the loss and the batch-mean
    /// entropies under the pre-update policy.
    pub fn policy_update<R: Rng + ?Sized>(
        &mut self,
        batch: &Batch<T>,
        rng: &mut R,
    ) -> Result<PolicyLoss<T>> {
        let eps = standard_normals(batch.size * self.n_actions(), rng);
        let pl = policy_loss_and_grad(
            &self.actor,
            &self.critics,
            &batch.obs,
            batch.size,
            &eps,
            self.temps.alpha_discrete(),
            self.temps.alpha_continuous(),
        )?;
        self.actor_opt.step(self.actor.net.params_mut(), &pl.grad)?;
        Ok(pl)
    }

    /// `target ← ρ·target + (1 − ρ)·online` for both critics.
    pub fn polyak_update(&mut self, rho: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::Invalid(format!("blend factor {rho} outside [0, 1]")));
        }
        let (keep, take) = (T::of(rho), T::of(1.0 - rho));
        for (target, online) in self.targets.iter_mut().zip(&self.critics) {
            for (t, o) in target.net.params_mut().iter_mut().zip(online.net.params()) {
                *t = keep * *t + take * *o;
            }
        }
        Ok(())
    }

    /// Critic, actor, temperature and target steps on one batch.
    pub fn update<R: Rng + ?Sized>(
        &mut self,
        batch: &Batch<T>,
        rng: &mut R,
        entropy_targets: (f64, f64),
        rho: f64,
    ) -> Result<UpdateStats> {
        let critic_loss = self.critic_update(batch, rng)?;
        let pl = self.policy_update(batch, rng)?;
        let (alpha_discrete, alpha_continuous) =
            self.temps
                .update(pl.entropy_discrete, pl.entropy_continuous, entropy_targets)?;
        self.polyak_update(rho)?;
        Ok(UpdateStats {
            critic_loss,
            policy_loss: pl.loss,
            alpha_discrete,
            alpha_continuous,
            entropy_discrete: pl.entropy_discrete,
            entropy_continuous: pl.entropy_continuous,
        })
    }

    /// Named network texts for a checkpoint directory.
    pub fn network_texts(&self) -> Vec<(&'static str, String)> {
        vec![
            ("actor.txt", self.actor.net.to_text()),
            ("critic1.txt", self.critics[0].net.to_text()),
            ("critic2.txt", self.critics[1].net.to_text()),
            ("target1.txt", self.targets[0].net.to_text()),
            ("target2.txt", self.targets[1].net.to_text()),
        ]
    }

    /// Replaces all networks from texts produced by [`Self::network_texts`].
    pub fn load_network_texts(&mut self, lookup: impl Fn(&str) -> Result<String>) -> Result<()> {
        let load = |name: &str, like: &Mlp<T>| -> Result<Mlp<T>> {
            let net = Mlp::from_text(&lookup(name)?)?;
            if net.sizes() != like.sizes() {
                return Err(Error::Invalid(format!(
                    "{name}: layer sizes {:?} do not match {:?}",
                    net.sizes(),
                    like.sizes()
                )));
            }
            Ok(net)
        };
        let n = self.n_actions();
        let actor = load("actor.txt", &self.actor.net)?;
        let c1 = load("critic1.txt", &self.critics[0].net)?;
        let c2 = load("critic2.txt", &self.critics[1].net)?;
        let t1 = load("target1.txt", &self.targets[0].net)?;
        let t2 = load("target2.txt", &self.targets[1].net)?;
        self.actor = Actor::from_net(actor)?;
        self.critics = [FourierCritic::from_net(c1, n)?, FourierCritic::from_net(c2, n)?];
        self.targets = [FourierCritic::from_net(t1, n)?, FourierCritic::from_net(t2, n)?];
        Ok(())
    }
}
