use rand::Rng;

use crate::env::{RewardEngine, Transition};
use crate::error::{Error, Result};
use crate::nn::Scalar;

/// Fixed-capacity ring of transitions with compact observation storage.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    capacity: usize,
    obs_size: usize,
    cursor: usize,
    len: usize,
    obs: Vec<f32>,
    next_obs: Vec<f32>,
    d: Vec<usize>,
    c: Vec<f64>,
    e_before: Vec<f64>,
    e_after: Vec<f64>,
    done: Vec<bool>,
    r: Vec<f64>,
}

/// Training batch with rewards already evaluated.
#[derive(Clone, Debug)]
pub struct Batch<T> {
    pub size: usize,
    pub obs: Vec<T>,
    pub next_obs: Vec<T>,
    pub d: Vec<usize>,
    pub c: Vec<f64>,
    pub reward: Vec<f64>,
    pub done: Vec<bool>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, obs_size: usize) -> Result<Self> {
        if capacity == 0 || obs_size == 0 {
            return Err(Error::Invalid("replay buffer needs positive capacity".into()));
        }
        Ok(ReplayBuffer {
            capacity,
            obs_size,
            cursor: 0,
            len: 0,
            obs: vec![0.0; capacity * obs_size],
            next_obs: vec![0.0; capacity * obs_size],
            d: vec![0; capacity],
            c: vec![0.0; capacity],
            e_before: vec![0.0; capacity],
            e_after: vec![0.0; capacity],
            done: vec![false; capacity],
            r: vec![0.0; capacity],
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Slot the next push writes to.
    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn push(&mut self, tr: &Transition) -> Result<()> {
        if tr.obs.len() != self.obs_size || tr.next_obs.len() != self.obs_size {
            return Err(Error::Dimension {
                expected: self.obs_size,
                got: tr.obs.len(),
            });
        }
        let i = self.cursor;
        let span = i * self.obs_size..(i + 1) * self.obs_size;
        for (dst, src) in self.obs[span.clone()].iter_mut().zip(tr.obs.as_slice()) {
            *dst = *src as f32;
        }
        for (dst, src) in self.next_obs[span].iter_mut().zip(tr.next_obs.as_slice()) {
            *dst = *src as f32;
        }
        self.d[i] = tr.action.d;
        self.c[i] = tr.action.c;
        self.e_before[i] = tr.e_before;
        self.e_after[i] = tr.e_after;
        self.done[i] = tr.done;
        self.r[i] = tr.r;
        self.cursor = (i + 1) % self.capacity;
        self.len = (self.len + 1).min(self.capacity);
        Ok(())
    }

    /// Indices drawn uniformly with replacement; the physical slot order is
    /// oldest-first only after wrap-around, which sampling ignores.
    pub fn sample_indices<R: Rng + ?Sized>(&self, size: usize, rng: &mut R) -> Result<Vec<usize>> {
        if size == 0 {
            return Err(Error::Invalid("batch size must be positive".into()));
        }
        if self.len < size {
            return Err(Error::Invalid(format!(
                "replay buffer holds {} transitions, batch needs {size}",
                self.len
            )));
        }
        Ok((0..size).map(|_| rng.gen_range(0..self.len)).collect())
    }

    /// Assembles a batch, computing rewards with the engine's current buffers.
    pub fn gather<T: Scalar>(&self, idx: &[usize], engine: &RewardEngine) -> Batch<T> {
        let n = self.obs_size;
        let mut obs = Vec::with_capacity(idx.len() * n);
        let mut next_obs = Vec::with_capacity(idx.len() * n);
        for &i in idx {
            obs.extend(self.obs[i * n..(i + 1) * n].iter().map(|v| T::of(*v as f64)));
            next_obs.extend(self.next_obs[i * n..(i + 1) * n].iter().map(|v| T::of(*v as f64)));
        }
        Batch {
            size: idx.len(),
            obs,
            next_obs,
            d: idx.iter().map(|&i| self.d[i]).collect(),
            c: idx.iter().map(|&i| self.c[i]).collect(),
            reward: idx
                .iter()
                .map(|&i| engine.reward_for(self.r[i], self.e_before[i], self.e_after[i]))
                .collect(),
            done: idx.iter().map(|&i| self.done[i]).collect(),
        }
    }

    pub fn sample<T: Scalar, R: Rng + ?Sized>(
        &self,
        size: usize,
        rng: &mut R,
        engine: &RewardEngine,
    ) -> Result<Batch<T>> {
        let idx = self.sample_indices(size, rng)?;
        Ok(self.gather(&idx, engine))
    }

    /// Stored `(d, c, e_before, e_after, done, r)` at slot `i`.
    pub fn record(&self, i: usize) -> Option<(usize, f64, f64, f64, bool, f64)> {
        (i < self.len).then(|| {
            (
                self.d[i],
                self.c[i],
                self.e_before[i],
                self.e_after[i],
                self.done[i],
                self.r[i],
            )
        })
    }
}
