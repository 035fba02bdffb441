//! Curriculum reward with per-parameter energy buffers.
//!
//! For every parameter value `R` the engine keeps the `m + k` lowest energies
//! seen so far. The lowest `m` define the center `μ_R`, the next `k` the
//! scale `σ_R = |μ_R − mean(next k)| + σ_min`, and
//! `f(E) = c_exp·exp(−(E − μ_R)/σ_R) − c_lin·E`. A transition's reward is
//! `f(E_after) − f(E_before)`, always evaluated with the current buffers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Transition;
use crate::error::{Error, Result};

/// Upper clamp on the exponent of the exponential term, keeping rewards finite
/// when an energy lands far below the current center.
pub const MAX_EXPONENT: f64 = 30.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardParams {
    /// Size of the buffer that defines the center.
    pub m: usize,
    /// Size of the buffer that defines the scale.
    pub k: usize,
    pub sigma_min: f64,
    pub c_exp: f64,
    pub c_lin: f64,
    /// Energy both buffers start from.
    pub e0: f64,
}

impl RewardParams {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.k == 0 {
            return Err(Error::Invalid("energy buffer sizes must be positive".into()));
        }
        if !(self.sigma_min > 0.0 && self.sigma_min.is_finite()) {
            return Err(Error::Invalid("sigma_min must be positive".into()));
        }
        if !(self.c_exp.is_finite() && self.c_lin.is_finite() && self.e0.is_finite()) {
            return Err(Error::Invalid("reward weights must be finite".into()));
        }
        Ok(())
    }
}

/// Parameter values are keyed on a 1e-9 grid.
fn key(r: f64) -> i64 {
    (r * 1e9).round() as i64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardEngine {
    params: RewardParams,
    pools: BTreeMap<i64, Vec<f64>>,
}

impl RewardEngine {
    pub fn new(params: RewardParams) -> Result<Self> {
        params.validate()?;
        Ok(RewardEngine {
            params,
            pools: BTreeMap::new(),
        })
    }

    pub fn params(&self) -> &RewardParams {
        &self.params
    }

    /// Sorted pool for `r`; a fresh pool holds only `E₀`.
    pub fn pool(&self, r: f64) -> &[f64] {
        self.pools
            .get(&key(r))
            .map(Vec::as_slice)
            .unwrap_or(std::slice::from_ref(&self.params.e0))
    }

    /// The center buffer (lowest `m`) and scale buffer (next `k`).
    ///
    /// Until more than `m` energies are pooled, the scale buffer holds the
    /// largest pooled energy.
    pub fn buffers(&self, r: f64) -> (&[f64], &[f64]) {
        let pool = self.pool(r);
        let m = self.params.m.min(pool.len());
        if pool.len() > self.params.m {
            (&pool[..m], &pool[m..])
        } else {
            (pool, &pool[pool.len() - 1..])
        }
    }

    pub fn observe(&mut self, r: f64, e: f64) {
        if !e.is_finite() {
            return;
        }
        let cap = self.params.m + self.params.k;
        let e0 = self.params.e0;
        let pool = self.pools.entry(key(r)).or_insert_with(|| vec![e0]);
        let at = pool.partition_point(|x| *x <= e);
        if at < cap {
            pool.insert(at, e);
            pool.truncate(cap);
        }
    }

    /// `(μ_R, σ_R)`.
    pub fn center_scale(&self, r: f64) -> (f64, f64) {
        let (low, next) = self.buffers(r);
        let mu = mean(low);
        let sigma = (mu - mean(next)).abs() + self.params.sigma_min;
        (mu, sigma)
    }

    /// Exponential component at the current buffers.
    pub fn f_exp(&self, r: f64, e: f64) -> f64 {
        let (mu, sigma) = self.center_scale(r);
        (-(e - mu) / sigma).min(MAX_EXPONENT).exp()
    }

    /// Shaping potential `f(R; E)`.
    pub fn potential(&self, r: f64, e: f64) -> f64 {
        self.params.c_exp * self.f_exp(r, e) - self.params.c_lin * e
    }

    pub fn reward_for(&self, r: f64, e_before: f64, e_after: f64) -> f64 {
        let (mu, sigma) = self.center_scale(r);
        let fexp = |e: f64| (-(e - mu) / sigma).min(MAX_EXPONENT).exp();
        self.params.c_exp * (fexp(e_after) - fexp(e_before))
            + self.params.c_lin * (-(e_after - e_before))
    }

    pub fn reward(&self, tr: &Transition) -> f64 {
        self.reward_for(tr.r, tr.e_before, tr.e_after)
    }

    /// Parameter values that have pools, with their sorted contents.
    pub fn pools(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.pools.iter().map(|(k, v)| (*k as f64 * 1e-9, v.as_slice()))
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}
