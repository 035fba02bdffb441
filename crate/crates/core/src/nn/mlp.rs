use std::fmt::Write as _;

use rand::Rng;

use super::Scalar;
use crate::error::{Error, Result};

const CHECKPOINT_MAGIC: &str = "qarl-mlp";
const CHECKPOINT_VERSION: u32 = 1;

/// Fully connected network: rectified-linear hidden layers, linear output.
///
/// All parameters live in one flat vector; layer `l` stores its weight
/// matrix (`out × in`, row-major) followed by its bias.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp<T> {
    sizes: Vec<usize>,
    params: Vec<T>,
}

/// Activations recorded by a batched forward pass.
#[derive(Clone, Debug)]
pub struct Tape<T> {
    batch: usize,
    acts: Vec<Vec<T>>,
}

impl<T: Scalar> Tape<T> {
    pub fn batch(&self) -> usize {
        self.batch
    }

    /// Network output, `batch × out` row-major.
    pub fn output(&self) -> &[T] {
        self.acts.last().expect("tape holds the input at least")
    }

    pub fn input(&self) -> &[T] {
        &self.acts[0]
    }
}

impl<T: Scalar> Mlp<T> {
    /// Uniform `±1/√fan_in` initialization of weights and biases.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<Self> {
        let mut net = Mlp::zeros(sizes)?;
        let mut offset = 0;
        for l in 0..net.n_layers() {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            for p in &mut net.params[offset..offset + fan_out * (fan_in + 1)] {
                *p = T::of(rng.gen_range(-bound..bound));
            }
            offset += fan_out * (fan_in + 1);
        }
        Ok(net)
    }

    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::Invalid(format!("bad layer sizes {sizes:?}")));
        }
        let count = sizes.windows(2).map(|w| w[1] * (w[0] + 1)).sum();
        Ok(Mlp {
            sizes: sizes.to_vec(),
            params: vec![T::zero(); count],
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn n_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn input_size(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    fn layer(&self, l: usize) -> (usize, usize, usize) {
        let offset: usize = self.sizes[..=l]
            .windows(2)
            .map(|w| w[1] * (w[0] + 1))
            .sum();
        (offset, self.sizes[l], self.sizes[l + 1])
    }

    pub fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        Ok(self.forward_batch(x, 1)?.output().to_vec())
    }

    /// Forward pass over `batch` row-major inputs, keeping activations.
    pub fn forward_batch(&self, x: &[T], batch: usize) -> Result<Tape<T>> {
        if x.len() != batch * self.input_size() || batch == 0 {
            return Err(Error::Dimension {
                expected: batch * self.input_size(),
                got: x.len(),
            });
        }
        let mut acts = Vec::with_capacity(self.sizes.len());
        acts.push(x.to_vec());
        for l in 0..self.n_layers() {
            let (offset, n_in, n_out) = self.layer(l);
            let w = &self.params[offset..offset + n_out * n_in];
            let b = &self.params[offset + n_out * n_in..offset + n_out * (n_in + 1)];
            let mut y = Vec::with_capacity(batch * n_out);
            for _ in 0..batch {
                y.extend_from_slice(b);
            }
            let input = acts.last().unwrap();
            T::gemm(batch, n_in, n_out, T::one(), input, (n_in, 1), w, (1, n_in), T::one(), &mut y, n_out);
            if l + 1 < self.n_layers() {
                y.iter_mut().for_each(|v| *v = v.max(T::zero()));
            }
            acts.push(y);
        }
        Ok(Tape { batch, acts })
    }

    /// Reverse pass for upstream gradient `dy` (`batch × out`).
    ///
    /// Parameter gradients are accumulated into `grad`; the input gradient
    /// is returned when `want_input` is set.
    pub fn backward_batch(
        &self,
        tape: &Tape<T>,
        dy: &[T],
        grad: &mut [T],
        want_input: bool,
    ) -> Result<Option<Vec<T>>> {
        let batch = tape.batch;
        if dy.len() != batch * self.output_size() {
            return Err(Error::Dimension {
                expected: batch * self.output_size(),
                got: dy.len(),
            });
        }
        if grad.len() != self.params.len() {
            return Err(Error::Dimension {
                expected: self.params.len(),
                got: grad.len(),
            });
        }
        let mut delta = dy.to_vec();
        for l in (0..self.n_layers()).rev() {
            let (offset, n_in, n_out) = self.layer(l);
            let input = &tape.acts[l];
            let (gw, rest) = grad[offset..offset + n_out * (n_in + 1)].split_at_mut(n_out * n_in);
            T::gemm(n_out, batch, n_in, T::one(), &delta, (1, n_out), input, (n_in, 1), T::one(), gw, n_in);
            for row in delta.chunks_exact(n_out) {
                for (g, d) in rest.iter_mut().zip(row) {
                    *g += *d;
                }
            }
            if l == 0 && !want_input {
                return Ok(None);
            }
            let w = &self.params[offset..offset + n_out * n_in];
            let mut dx = vec![T::zero(); batch * n_in];
            T::gemm(batch, n_out, n_in, T::one(), &delta, (n_out, 1), w, (n_in, 1), T::zero(), &mut dx, n_in);
            if l > 0 {
                // ReLU mask from the post-activation values
                for (d, a) in dx.iter_mut().zip(input) {
                    if *a <= T::zero() {
                        *d = T::zero();
                    }
                }
            }
            delta = dx;
        }
        Ok(Some(delta))
    }

    /// Gradients of `⟨upstream, forward(x)⟩` with respect to the parameters and `x`.
    pub fn backward(&self, x: &[T], upstream: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        let tape = self.forward_batch(x, 1)?;
        let mut grad = vec![T::zero(); self.params.len()];
        let dx = self
            .backward_batch(&tape, upstream, &mut grad, true)?
            .expect("input gradient requested");
        Ok((grad, dx))
    }

    pub fn copy_from(&mut self, other: &Mlp<T>) {
        assert_eq!(self.sizes, other.sizes);
        self.params.copy_from_slice(&other.params);
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}\nsizes");
        for s in &self.sizes {
            let _ = write!(out, " {s}");
        }
        out.push('\n');
        for p in &self.params {
            let _ = writeln!(out, "{:?}", p.f64());
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let bad = |line: usize, msg: &str| Error::Parse {
            line: line + 1,
            msg: msg.to_string(),
        };
        match lines.next() {
            Some((_, l)) if l.trim() == format!("{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}") => {}
            _ => return Err(bad(0, "missing network checkpoint header")),
        }
        let (i, sizes_line) = lines.next().ok_or_else(|| bad(1, "missing sizes"))?;
        let sizes = sizes_line
            .strip_prefix("sizes")
            .ok_or_else(|| bad(i, "missing sizes"))?
            .split_whitespace()
            .map(|s| s.parse::<usize>().map_err(|_| bad(i, "bad layer size")))
            .collect::<Result<Vec<_>>>()?;
        let mut net = Mlp::zeros(&sizes)?;
        let mut count = 0;
        for (i, l) in lines.filter(|(_, l)| !l.trim().is_empty()) {
            if count >= net.params.len() {
                return Err(bad(i, "too many parameters"));
            }
            let v: f64 = l.trim().parse().map_err(|_| bad(i, "bad parameter"))?;
            net.params[count] = T::of(v);
            count += 1;
        }
        if count != net.params.len() {
            return Err(Error::Dimension {
                expected: net.params.len(),
                got: count,
            });
        }
        Ok(net)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_network_outputs_zero() {
        let net = Mlp::<f64>::zeros(&[3, 4, 2]).unwrap();
        assert_eq!(net.forward(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn identity_linear_layer() {
        let mut net = Mlp::<f64>::zeros(&[3, 3]).unwrap();
        for i in 0..3 {
            net.params_mut()[i * 3 + i] = 1.0;
        }
        let x = [0.5, -1.5, 2.0];
        assert_eq!(net.forward(&x).unwrap(), x.to_vec());
    }

    #[test]
    fn forward_is_deterministic_and_checks_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = Mlp::<f64>::new(&[4, 8, 2], &mut rng).unwrap();
        let x = [0.1, 0.2, 0.3, 0.4];
        assert_eq!(net.forward(&x).unwrap(), net.forward(&x).unwrap());
        assert!(net.forward(&x[..3]).is_err());
    }

    #[test]
    fn zero_upstream_gives_zero_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let net = Mlp::<f64>::new(&[3, 5, 2], &mut rng).unwrap();
        let (g, dx) = net.backward(&[1.0, 2.0, 3.0], &[0.0, 0.0]).unwrap();
        assert!(g.iter().chain(&dx).all(|v| *v == 0.0));
    }

    #[test]
    fn batch_matches_single_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let net = Mlp::<f64>::new(&[3, 6, 4, 2], &mut rng).unwrap();
        let xs: Vec<f64> = (0..9).map(|i| (i as f64 * 0.37).sin()).collect();
        let tape = net.forward_batch(&xs, 3).unwrap();
        for b in 0..3 {
            let y = net.forward(&xs[b * 3..b * 3 + 3]).unwrap();
            for (u, v) in y.iter().zip(&tape.output()[b * 2..b * 2 + 2]) {
                assert!((u - v).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn checkpoint_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let net = Mlp::<f32>::new(&[3, 4, 2], &mut rng).unwrap();
        let back = Mlp::<f32>::from_text(&net.to_text()).unwrap();
        assert_eq!(net, back);
        assert!(Mlp::<f32>::from_text("qarl-mlp 2\nsizes 1 1\n0\n0\n").is_err());
        assert!(Mlp::<f32>::from_text("qarl-mlp 1\nsizes 1 1\n0\n").is_err());
    }
}
