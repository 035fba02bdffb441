use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::{Mlp, Scalar};

/// Soft action-value network over hybrid actions.
///
/// The trunk maps an observation to `n_actions × (2K + 1)` coefficients; the
/// value of placement `d` at angle `c` is the truncated Fourier series
/// `Q_d(s, c) = w₀ + Σ_k (w_{2k−1} cos kc + w_{2k} sin kc)` built from row `d`.
/// All placements with distinct angles are therefore scored by one forward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierCritic<T> {
    pub net: Mlp<T>,
    n_actions: usize,
    harmonics: usize,
}

/// Angle basis `[1, cos c, sin c, cos 2c, sin 2c, …]`.
pub fn fourier_basis(c: f64, harmonics: usize, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    for k in 1..=harmonics {
        let (s, co) = (k as f64 * c).sin_cos();
        out.push(co);
        out.push(s);
    }
}

/// `(sin c, cos c)` of an angle, computed once and shared by every critic
/// that scores it. Higher harmonics follow by rotation.
#[derive(Clone, Copy, Debug)]
pub struct AngleTrig {
    sin: f64,
    cos: f64,
}

impl AngleTrig {
    pub fn new(c: f64) -> Self {
        let (sin, cos) = c.sin_cos();
        AngleTrig { sin, cos }
    }
}

impl<T: Scalar> FourierCritic<T> {
    pub fn new<R: Rng + ?Sized>(
        obs_size: usize,
        hidden: &[usize],
        n_actions: usize,
        harmonics: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let mut sizes = vec![obs_size];
        sizes.extend_from_slice(hidden);
        sizes.push(n_actions * (2 * harmonics + 1));
        Ok(FourierCritic {
            net: Mlp::new(&sizes, rng)?,
            n_actions,
            harmonics,
        })
    }

    pub fn from_net(net: Mlp<T>, n_actions: usize) -> Result<Self> {
        let out = net.output_size();
        if n_actions == 0 || !out.is_multiple_of(n_actions) || (out / n_actions).is_multiple_of(2) {
            return Err(Error::Invalid(format!(
                "critic output size {out} does not fit {n_actions} actions"
            )));
        }
        Ok(FourierCritic {
            harmonics: (out / n_actions - 1) / 2,
            net,
            n_actions,
        })
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn harmonics(&self) -> usize {
        self.harmonics
    }

    pub fn n_basis(&self) -> usize {
        2 * self.harmonics + 1
    }

    /// `Q_d(c)` from one row of trunk output.
    pub fn value(&self, row: &[T], d: usize, c: f64) -> f64 {
        self.value_and_slope(row, d, AngleTrig::new(c)).0
    }

    /// `∂Q_d/∂c` from one row of trunk output.
    pub fn value_slope(&self, row: &[T], d: usize, c: f64) -> f64 {
        self.value_and_slope(row, d, AngleTrig::new(c)).1
    }

    /// `(Q_d(c), ∂Q_d/∂c)` from one row of trunk output.
    pub fn value_and_slope(&self, row: &[T], d: usize, trig: AngleTrig) -> (f64, f64) {
        let nb = self.n_basis();
        let w = &row[d * nb..(d + 1) * nb];
        let (mut q, mut g) = (w[0].f64(), 0.0);
        let (mut sk, mut ck) = (trig.sin, trig.cos);
        for k in 1..=self.harmonics {
            let (a, b) = (w[2 * k - 1].f64(), w[2 * k].f64());
            q += a * ck + b * sk;
            g += k as f64 * (b * ck - a * sk);
            (sk, ck) = (sk * trig.cos + ck * trig.sin, ck * trig.cos - sk * trig.sin);
        }
        (q, g)
    }

    /// Single-observation value for placement `d` at angle `c`.
    pub fn q(&self, obs: &[T], d: usize, c: f64) -> Result<f64> {
        if d >= self.n_actions {
            return Err(Error::OutOfRange {
                index: d,
                limit: self.n_actions,
            });
        }
        let out = self.net.forward(obs)?;
        Ok(self.value(&out, d, c))
    }
}
