use super::Scalar;
use crate::error::{Error, Result};

/// Adaptive-moment optimizer state for one flat parameter vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam<T> {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: Vec<T>,
    v: Vec<T>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(n_params: usize, lr: f64) -> Self {
        Adam::with_moments(n_params, lr, 0.9, 0.999, 1e-8)
    }

    pub fn with_moments(n_params: usize, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Adam {
            lr,
            beta1,
            beta2,
            eps,
            step: 0,
            m: vec![T::zero(); n_params],
            v: vec![T::zero(); n_params],
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn moments(&self) -> (&[T], &[T]) {
        (&self.m, &self.v)
    }

    pub fn restore(&mut self, step: u64, m: Vec<T>, v: Vec<T>) -> Result<()> {
        if m.len() != self.m.len() || v.len() != self.v.len() {
            return Err(Error::Dimension {
                expected: self.m.len(),
                got: m.len().min(v.len()),
            });
        }
        self.step = step;
        self.m = m;
        self.v = v;
        Ok(())
    }

    /// One bias-corrected update, in place.
    pub fn step(&mut self, params: &mut [T], grads: &[T]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::Dimension {
                expected: self.m.len(),
                got: if params.len() != self.m.len() {
                    params.len()
                } else {
                    grads.len()
                },
            });
        }
        if grads.iter().any(|g| !g.is_finite()) {
            return Err(Error::Numerical("non-finite gradient".into()));
        }
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        let (b1, b2) = (T::of(self.beta1), T::of(self.beta2));
        let (one_b1, one_b2) = (T::of(1.0 - self.beta1), T::of(1.0 - self.beta2));
        let step_size = T::of(self.lr / bc1);
        let inv_sqrt_bc2 = T::of(1.0 / bc2.sqrt());
        let eps = T::of(self.eps);
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            *m = b1 * *m + one_b1 * *g;
            *v = b2 * *v + one_b2 * *g * *g;
            *p -= step_size * *m / ((*v).sqrt() * inv_sqrt_bc2 + eps);
        }
        Ok(())
    }
}
