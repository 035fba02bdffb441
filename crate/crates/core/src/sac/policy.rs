use std::f64::consts::PI;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::env::HybridAction;
use crate::error::{Error, Result};
use crate::nn::{Mlp, Scalar};

/// Range the log standard deviation is smoothly mapped into.
pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;
/// Continuous actions live in `(−ANGLE_BOUND, ANGLE_BOUND)`.
pub const ANGLE_BOUND: f64 = PI;

/// Pre-squash values are clipped here when mapped to angles, where `tanh`
/// is still strictly below one in double precision.
const SQUASH_LIMIT: f64 = 18.0;

const HALF_LOG_2PI: f64 = 0.918_938_533_204_672_8;

pub(crate) fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// `log(1 − tanh²u)`, stable for large `|u|`.
pub(crate) fn log_sech2(u: f64) -> f64 {
    2.0 * (std::f64::consts::LN_2 - u.abs() - softplus(-2.0 * u.abs()))
}

/// Maps an unconstrained head output into `[LOG_STD_MIN, LOG_STD_MAX]`.
pub fn squash_log_std(raw: f64) -> f64 {
    LOG_STD_MIN + 0.5 * (LOG_STD_MAX - LOG_STD_MIN) * (raw.tanh() + 1.0)
}

/// `ANGLE_BOUND·tanh(u)`, strictly inside the open angle interval.
pub fn squash_angle(u: f64) -> f64 {
    ANGLE_BOUND * u.clamp(-SQUASH_LIMIT, SQUASH_LIMIT).tanh()
}

/// Log-density of `c = ANGLE_BOUND·tanh(μ + σε)` at the given noise.
pub fn squashed_log_density(eps: f64, log_std: f64, u: f64) -> f64 {
    -0.5 * eps * eps - HALF_LOG_2PI - log_std - ANGLE_BOUND.ln() - log_sech2(u)
}

/// Factorized hybrid policy: a softmax over gate placements and, per
/// placement, a squashed Gaussian over the angle.
///
/// The network output per observation is `[logits | means | raw log-stds]`,
/// each block `n_actions` wide.
#[derive(Clone, Debug, PartialEq)]
pub struct Actor<T> {
    pub net: Mlp<T>,
    n_actions: usize,
}

/// Per-sample policy quantities for a batch under fixed noise, all
/// `batch × n_actions` row-major.
#[derive(Clone, Debug)]
pub struct PolicyEval {
    pub batch: usize,
    pub n_actions: usize,
    pub probs: Vec<f64>,
    pub log_probs: Vec<f64>,
    pub mean: Vec<f64>,
    pub raw_log_std: Vec<f64>,
    pub log_std: Vec<f64>,
    pub eps: Vec<f64>,
    /// Pre-squash Gaussian sample `μ + σε`.
    pub u: Vec<f64>,
    pub angle: Vec<f64>,
    pub angle_log_density: Vec<f64>,
}

impl PolicyEval {
    /// Exact entropy of the discrete distribution for sample `b`.
    pub fn discrete_entropy(&self, b: usize) -> f64 {
        let row = b * self.n_actions..(b + 1) * self.n_actions;
        -self.probs[row.clone()]
            .iter()
            .zip(&self.log_probs[row])
            .map(|(p, lp)| p * lp)
            .sum::<f64>()
    }

    /// One-sample-per-placement estimate of the probability-weighted
    /// continuous entropy for sample `b`.
    pub fn continuous_entropy(&self, b: usize) -> f64 {
        let row = b * self.n_actions..(b + 1) * self.n_actions;
        -self.probs[row.clone()]
            .iter()
            .zip(&self.angle_log_density[row])
            .map(|(p, lp)| p * lp)
            .sum::<f64>()
    }
}

impl<T: Scalar> Actor<T> {
    pub fn new<R: Rng + ?Sized>(
        obs_size: usize,
        hidden: &[usize],
        n_actions: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let mut sizes = vec![obs_size];
        sizes.extend_from_slice(hidden);
        sizes.push(3 * n_actions);
        Ok(Actor {
            net: Mlp::new(&sizes, rng)?,
            n_actions,
        })
    }

    pub fn from_net(net: Mlp<T>) -> Result<Self> {
        if !net.output_size().is_multiple_of(3) {
            return Err(Error::Invalid(format!(
                "actor output size {} is not a multiple of three",
                net.output_size()
            )));
        }
        let n_actions = net.output_size() / 3;
        Ok(Actor { net, n_actions })
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn obs_size(&self) -> usize {
        self.net.input_size()
    }

    /// Policy quantities from raw network outputs (`batch × 3·n_actions`)
    /// and standard-normal noise (`batch × n_actions`).
    pub fn evaluate(&self, out: &[T], eps: &[f64]) -> PolicyEval {
        let a = self.n_actions;
        let batch = out.len() / (3 * a);
        assert_eq!(eps.len(), batch * a, "one noise value per placement");
        let mut ev = PolicyEval {
            batch,
            n_actions: a,
            probs: Vec::with_capacity(batch * a),
            log_probs: Vec::with_capacity(batch * a),
            mean: Vec::with_capacity(batch * a),
            raw_log_std: Vec::with_capacity(batch * a),
            log_std: Vec::with_capacity(batch * a),
            eps: eps.to_vec(),
            u: Vec::with_capacity(batch * a),
            angle: Vec::with_capacity(batch * a),
            angle_log_density: Vec::with_capacity(batch * a),
        };
        for (b, row) in out.chunks_exact(3 * a).enumerate() {
            let logits = &row[..a];
            let max = logits.iter().map(|l| l.f64()).fold(f64::NEG_INFINITY, f64::max);
            let lse = max + logits.iter().map(|l| (l.f64() - max).exp()).sum::<f64>().ln();
            for l in logits {
                let lp = l.f64() - lse;
                ev.log_probs.push(lp);
                ev.probs.push(lp.exp());
            }
            for d in 0..a {
                let mu = row[a + d].f64();
                let raw = row[2 * a + d].f64();
                let ls = squash_log_std(raw);
                let e = eps[b * a + d];
                let u = mu + ls.exp() * e;
                ev.mean.push(mu);
                ev.raw_log_std.push(raw);
                ev.log_std.push(ls);
                ev.u.push(u);
                ev.angle.push(squash_angle(u));
                ev.angle_log_density.push(squashed_log_density(e, ls, u));
            }
        }
        ev
    }

    pub fn evaluate_obs(&self, obs: &[T], batch: usize, eps: &[f64]) -> Result<PolicyEval> {
        let tape = self.net.forward_batch(obs, batch)?;
        Ok(self.evaluate(tape.output(), eps))
    }

    /// Stochastic action with its discrete log-probability and continuous
    /// log-density.
    pub fn sample_action<R: Rng + ?Sized>(
        &self,
        obs: &[T],
        rng: &mut R,
    ) -> Result<(HybridAction, f64, f64)> {
        let out = self.net.forward(obs)?;
        let a = self.n_actions;
        let eps: Vec<f64> = (0..a).map(|_| rng.sample(StandardNormal)).collect();
        let ev = self.evaluate(&out, &eps);
        let d = WeightedIndex::new(&ev.probs)
            .map_err(|e| Error::Numerical(format!("policy probabilities: {e}")))?
            .sample(rng);
        Ok((
            HybridAction {
                d,
                c: ev.angle[d],
            },
            ev.log_probs[d],
            ev.angle_log_density[d],
        ))
    }

    /// Most likely placement with the noise-free squashed mean angle.
    pub fn deterministic_action(&self, obs: &[T]) -> Result<HybridAction> {
        let out = self.net.forward(obs)?;
        let a = self.n_actions;
        let d = out[..a]
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.f64().total_cmp(&y.1.f64()).then(y.0.cmp(&x.0)))
            .map(|(i, _)| i)
            .expect("at least one action");
        Ok(HybridAction {
            d,
            c: squash_angle(out[a + d].f64()),
        })
    }

    /// `(H_d, Ĥ_c)` for one observation.
    pub fn entropies<R: Rng + ?Sized>(&self, obs: &[T], rng: &mut R) -> Result<(f64, f64)> {
        let eps: Vec<f64> = (0..self.n_actions).map(|_| rng.sample(StandardNormal)).collect();
        let ev = self.evaluate_obs(obs, 1, &eps)?;
        Ok((ev.discrete_entropy(0), ev.continuous_entropy(0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Actor whose output ignores the input: only the last-layer bias is set.
    fn constant_actor(logits: &[f64], mean: f64, raw_ls: f64) -> Actor<f64> {
        let a = logits.len();
        let mut net = Mlp::<f64>::zeros(&[2, 3 * a]).unwrap();
        let bias = &mut net.params_mut()[2 * 3 * a..];
        bias[..a].copy_from_slice(logits);
        bias[a..2 * a].iter_mut().for_each(|v| *v = mean);
        bias[2 * a..].iter_mut().for_each(|v| *v = raw_ls);
        Actor::from_net(net).unwrap()
    }

    #[test]
    fn argmax_and_midpoint() {
        let actor = constant_actor(&[1.0, 5.0, 2.0], 0.0, 0.0);
        let a = actor.deterministic_action(&[0.3, 0.1]).unwrap();
        assert_eq!(a, HybridAction { d: 1, c: 0.0 });
        assert_eq!(actor.deterministic_action(&[0.3, 0.1]).unwrap(), a);
    }

    #[test]
    fn samples_stay_inside_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let actor = constant_actor(&[0.0; 4], 3.0, 5.0);
        for _ in 0..2000 {
            let (a, lp_d, lp_c) = actor.sample_action(&[0.0, 0.0], &mut rng).unwrap();
            assert!(a.c > -PI && a.c < PI);
            assert!((lp_d - 0.25f64.ln()).abs() < 1e-12);
            assert!(lp_c.is_finite());
        }
    }

    #[test]
    fn entropy_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let one_hot = constant_actor(&[0.0, 800.0, 0.0], 0.0, 0.0);
        assert!(one_hot.entropies(&[0.0, 0.0], &mut rng).unwrap().0.abs() < 1e-12);
        let uniform = constant_actor(&[0.0; 24], 0.0, 0.0);
        let (hd, _) = uniform.entropies(&[0.0, 0.0], &mut rng).unwrap();
        assert!((hd - 24f64.ln()).abs() < 1e-12);
        assert!((hd - 3.178).abs() < 1e-3);
    }

    #[test]
    fn extreme_inputs_stay_open() {
        assert!(squash_angle(1e6) < PI && squash_angle(-1e6) > -PI);
    }

    #[test]
    fn log_std_mapping() {
        assert_eq!(squash_log_std(0.0), -1.5);
        assert!((squash_log_std(50.0) - LOG_STD_MAX).abs() < 1e-12);
        assert!((squash_log_std(-50.0) - LOG_STD_MIN).abs() < 1e-12);
    }

    #[test]
    fn stable_log_sech2() {
        for u in [-40.0, -3.0, 0.0, 0.5, 2.0, 30.0] {
            let direct = (1.0 - f64::tanh(u).powi(2)).ln();
            if direct.is_finite() && u.abs() < 10.0 {
                assert!((log_sech2(u) - direct).abs() < 1e-10);
            }
            assert!(log_sech2(u).is_finite());
        }
    }
}
