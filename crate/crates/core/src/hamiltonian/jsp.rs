//! Job-shop scheduling as a diagonal qubit Hamiltonian.
//!
//! Binary variables `x[i][α]` (job `i` runs on machine `α`) and `y[n][α]`
//! (machine 1 runs exactly `n` longer than machine `α`, for `α ≥ 2`) are
//! mapped to qubits via `b ↦ (I − Z)/2`. Register layout: all `x` qubits
//! first, machine-major (`q = α·N + i`), then all `y` qubits, machine-major
//! (`q = N·m + (α − 1)·𝓜 + (n − 1)`), all indices zero-based except `n`.

use std::collections::BTreeMap;

use super::{PauliString, PauliSum};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct JspInstance {
    /// Processing time of each job.
    pub lengths: Vec<u32>,
    pub n_machines: usize,
    /// Largest representable run-time difference between machine 1 and another machine.
    pub max_diff: u32,
    /// Constraint penalty weight.
    pub a_weight: f64,
    /// Makespan weight.
    pub b_weight: f64,
}

impl JspInstance {
    pub fn n_jobs(&self) -> usize {
        self.lengths.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_jobs() * self.n_machines + (self.n_machines - 1) * self.max_diff as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.lengths.is_empty() || self.lengths.contains(&0) {
            return Err(Error::Invalid("job lengths must be positive".into()));
        }
        if self.n_machines < 2 {
            return Err(Error::Invalid("need at least two machines".into()));
        }
        if self.max_diff == 0 {
            return Err(Error::Invalid("max_diff must be positive".into()));
        }
        let max_len = *self.lengths.iter().max().unwrap() as f64;
        let scaled = self.b_weight * max_len;
        if !(scaled > 0.0 && scaled < self.a_weight) {
            return Err(Error::Invalid(format!(
                "pre-factors violate 0 < B·max(L) < A (B·max(L) = {scaled}, A = {})",
                self.a_weight
            )));
        }
        Ok(())
    }

    /// Qubit carrying `x[job][machine]`, both zero-based.
    pub fn x_qubit(&self, job: usize, machine: usize) -> usize {
        machine * self.n_jobs() + job
    }

    /// Qubit carrying `y[diff][machine]` for `diff ∈ 1..=max_diff`, `machine ≥ 1` (zero-based).
    pub fn y_qubit(&self, diff: usize, machine: usize) -> usize {
        self.n_jobs() * self.n_machines + (machine - 1) * self.max_diff as usize + (diff - 1)
    }

    pub fn hamiltonian(&self) -> Result<PauliSum> {
        self.validate()?;
        let mut qubo = Qubo::default();
        let a = self.a_weight;
        for job in 0..self.n_jobs() {
            let vars: Vec<(usize, f64)> = (0..self.n_machines)
                .map(|m| (self.x_qubit(job, m), -1.0))
                .collect();
            qubo.add_squared(a, 1.0, &vars);
        }
        // The machine-1 term of the balance sum vanishes identically.
        for machine in 1..self.n_machines {
            let mut vars = Vec::new();
            for diff in 1..=self.max_diff as usize {
                vars.push((self.y_qubit(diff, machine), diff as f64));
            }
            for (job, &len) in self.lengths.iter().enumerate() {
                vars.push((self.x_qubit(job, machine), len as f64));
                vars.push((self.x_qubit(job, 0), -(len as f64)));
            }
            qubo.add_squared(a, 0.0, &vars);
        }
        for (job, &len) in self.lengths.iter().enumerate() {
            qubo.add_linear(self.x_qubit(job, 0), self.b_weight * len as f64);
        }
        qubo.to_pauli_sum(self.n_qubits())
    }
}

/// Quadratic pseudo-Boolean polynomial over binary variables.
#[derive(Default)]
struct Qubo {
    constant: f64,
    linear: BTreeMap<usize, f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
}

impl Qubo {
    fn add_linear(&mut self, k: usize, w: f64) {
        *self.linear.entry(k).or_default() += w;
    }

    fn add_pair(&mut self, k: usize, l: usize, w: f64) {
        if k == l {
            // b² = b
            self.add_linear(k, w);
        } else {
            *self.quadratic.entry((k.min(l), k.max(l))).or_default() += w;
        }
    }

    /// Adds `weight · (c0 + Σ a_k b_k)²`.
    fn add_squared(&mut self, weight: f64, c0: f64, vars: &[(usize, f64)]) {
        self.constant += weight * c0 * c0;
        for (i, &(k, ak)) in vars.iter().enumerate() {
            self.add_linear(k, weight * 2.0 * c0 * ak);
            self.add_pair(k, k, weight * ak * ak);
            for &(l, al) in &vars[i + 1..] {
                self.add_pair(k, l, weight * 2.0 * ak * al);
            }
        }
    }

    fn to_pauli_sum(&self, n: usize) -> Result<PauliSum> {
        let mut terms = vec![(self.constant, PauliString::identity(n)?)];
        for (&k, &h) in &self.linear {
            terms.push((h / 2.0, PauliString::identity(n)?));
            terms.push((-h / 2.0, PauliString::zs(n, &[k])?));
        }
        for (&(k, l), &j) in &self.quadratic {
            terms.push((j / 4.0, PauliString::identity(n)?));
            terms.push((-j / 4.0, PauliString::zs(n, &[k])?));
            terms.push((-j / 4.0, PauliString::zs(n, &[l])?));
            terms.push((j / 4.0, PauliString::zs(n, &[k, l])?));
        }
        PauliSum::new(n, terms)
    }
}
