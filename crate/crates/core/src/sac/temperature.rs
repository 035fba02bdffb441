use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Adam;

use super::policy::{log_sech2, ANGLE_BOUND, LOG_STD_MAX, LOG_STD_MIN};

/// Entropy of `ANGLE_BOUND·tanh(u)` with `u ~ N(mean, e^{2·log_std})`, by
/// trapezoidal quadrature over `mean ± 12σ`.
pub fn squashed_gaussian_entropy(mean: f64, log_std: f64) -> f64 {
    const STEPS: usize = 4000;
    let sigma = log_std.exp();
    let (lo, hi) = (mean - 12.0 * sigma, mean + 12.0 * sigma);
    let h = (hi - lo) / STEPS as f64;
    let mut acc = 0.0;
    for i in 0..=STEPS {
        let u = lo + i as f64 * h;
        let z = (u - mean) / sigma;
        let w = if i == 0 || i == STEPS { 0.5 } else { 1.0 };
        acc += w * (-0.5 * z * z).exp() * log_sech2(u);
    }
    let expected_log_sech2 = acc * h / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln()
        + log_std
        + ANGLE_BOUND.ln()
        + expected_log_sech2
}

/// Largest entropy a zero-mean squashed Gaussian reaches over the allowed
/// log-std range, with the maximizing log-std.
pub fn max_squashed_entropy() -> (f64, f64) {
    let f = |ls: f64| squashed_gaussian_entropy(0.0, ls);
    let grid = 140;
    let step = (LOG_STD_MAX - LOG_STD_MIN) / grid as f64;
    let best = (0..=grid)
        .map(|i| LOG_STD_MIN + i as f64 * step)
        .max_by(|a, b| f(*a).total_cmp(&f(*b)))
        .expect("nonempty grid");
    // golden-section refinement inside the bracketing cells
    let (mut a, mut b) = ((best - step).max(LOG_STD_MIN), (best + step).min(LOG_STD_MAX));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > 1e-9 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    let ls = 0.5 * (a + b);
    (f(ls), ls)
}

/// Target-entropy settings shared by run configuration and the schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EntropySettings {
    pub decay_discrete: f64,
    pub decay_continuous: f64,
    pub deduction_discrete: f64,
    pub deduction_continuous: f64,
    pub end_discrete: f64,
    pub end_continuous: f64,
}

/// Exponentially decaying target entropies for the discrete and continuous
/// policy parts.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetEntropySchedule {
    pub start_discrete: f64,
    pub end_discrete: f64,
    pub decay_discrete: f64,
    pub start_continuous: f64,
    pub end_continuous: f64,
    pub decay_continuous: f64,
    /// Total number of environment steps in the run.
    pub total_steps: f64,
}

impl TargetEntropySchedule {
    /// Start values sit the configured deduction below the respective
    /// maximal entropy.
    pub fn new(n_actions: usize, settings: &EntropySettings, total_steps: f64) -> Result<Self> {
        if n_actions == 0 || !(total_steps > 0.0) {
            return Err(Error::Invalid(
                "entropy schedule needs actions and a positive step total".into(),
            ));
        }
        Ok(TargetEntropySchedule {
            start_discrete: (n_actions as f64).ln() - settings.deduction_discrete,
            end_discrete: settings.end_discrete,
            decay_discrete: settings.decay_discrete,
            start_continuous: max_squashed_entropy().0 - settings.deduction_continuous,
            end_continuous: settings.end_continuous,
            decay_continuous: settings.decay_continuous,
            total_steps,
        })
    }

    /// `(discrete, continuous)` targets after `t_current` environment steps.
    pub fn targets(&self, t_current: f64) -> (f64, f64) {
        let frac = t_current / self.total_steps;
        (
            self.end_discrete
                + (self.start_discrete - self.end_discrete) * (-self.decay_discrete * frac).exp(),
            self.end_continuous
                + (self.start_continuous - self.end_continuous)
                    * (-self.decay_continuous * frac).exp(),
        )
    }
}

/// Learned log-temperatures for the two entropy terms.
#[derive(Clone, Debug, PartialEq)]
pub struct Temperatures {
    pub log_alpha_discrete: f64,
    pub log_alpha_continuous: f64,
    opt_discrete: Adam<f64>,
    opt_continuous: Adam<f64>,
}

/// Loss `α·(H − H_target)` and its derivative with respect to `log α`.
pub fn temperature_loss(log_alpha: f64, entropy: f64, target: f64) -> (f64, f64) {
    let alpha = log_alpha.exp();
    let loss = alpha * (entropy - target);
    (loss, loss)
}

impl Temperatures {
    pub fn new(initial_alpha: f64, lr_discrete: f64, lr_continuous: f64) -> Result<Self> {
        if !(initial_alpha > 0.0 && initial_alpha.is_finite()) {
            return Err(Error::Invalid("initial temperature must be positive".into()));
        }
        Ok(Temperatures {
            log_alpha_discrete: initial_alpha.ln(),
            log_alpha_continuous: initial_alpha.ln(),
            opt_discrete: Adam::new(1, lr_discrete),
            opt_continuous: Adam::new(1, lr_continuous),
        })
    }

    pub fn alpha_discrete(&self) -> f64 {
        self.log_alpha_discrete.exp()
    }

    pub fn alpha_continuous(&self) -> f64 {
        self.log_alpha_continuous.exp()
    }

    /// One optimizer step on each temperature given batch-mean entropies.
    pub fn update(
        &mut self,
        entropy_discrete: f64,
        entropy_continuous: f64,
        (target_discrete, target_continuous): (f64, f64),
    ) -> Result<(f64, f64)> {
        let (_, gd) = temperature_loss(self.log_alpha_discrete, entropy_discrete, target_discrete);
        let (_, gc) = temperature_loss(
            self.log_alpha_continuous,
            entropy_continuous,
            target_continuous,
        );
        let mut p = [self.log_alpha_discrete];
        self.opt_discrete.step(&mut p, &[gd])?;
        self.log_alpha_discrete = p[0];
        let mut p = [self.log_alpha_continuous];
        self.opt_continuous.step(&mut p, &[gc])?;
        self.log_alpha_continuous = p[0];
        Ok((self.alpha_discrete(), self.alpha_continuous()))
    }
}
