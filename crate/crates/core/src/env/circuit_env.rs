use crate::error::{Error, Result};
use crate::hamiltonian::{CompiledPauliSum, HamiltonianFamily, R_MATCH_EPS};
use crate::sim::{expectation_compiled, Circuit, StateVector};

use super::{ActionTable, GaussianFeaturizer, HybridAction};

/// Flat observation vector: real parts, imaginary parts, normalized step,
/// then the parameter features.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation(pub Vec<f64>);

impl Observation {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Expected length for `n` qubits and `j` features.
    pub fn size(n: usize, j: usize) -> usize {
        (2usize << n) + 1 + j
    }
}

/// One recorded environment step. Rewards are computed later from the two
/// energies so that they always reflect the current energy buffers.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub obs: Observation,
    pub action: HybridAction,
    pub e_before: f64,
    pub e_after: f64,
    pub next_obs: Observation,
    pub done: bool,
    pub r: f64,
}

#[derive(Clone, Debug)]
pub struct EnvState {
    pub psi: StateVector,
    pub t: usize,
    pub r: f64,
    pub circuit: Circuit,
    pub energy: f64,
    /// Parameter value of the Hamiltonian energies are measured against.
    pub hamiltonian_r: f64,
    /// Set when no Hamiltonian was sampled at `r` and the nearest one is used.
    pub nearest_fallback: bool,
}

/// Fixed-length circuit construction episodes over a Hamiltonian family.
#[derive(Clone, Debug)]
pub struct CircuitEnv {
    n: usize,
    max_gates: usize,
    table: ActionTable,
    featurizer: GaussianFeaturizer,
    template: Circuit,
    start: StateVector,
    r_bounds: (f64, f64),
    hamiltonians: Vec<(f64, CompiledPauliSum)>,
    active: usize,
    state: Option<EnvState>,
}

impl CircuitEnv {
    /// `start_bits` is the basis state every episode starts from (leftmost
    /// character is qubit 0).
    pub fn new(
        family: &HamiltonianFamily,
        start_bits: &str,
        max_gates: usize,
        featurizer: GaussianFeaturizer,
    ) -> Result<Self> {
        let n = family.n_qubits();
        if max_gates == 0 {
            return Err(Error::Invalid("gate budget must be positive".into()));
        }
        let template = Circuit::with_basis_prelude(n, start_bits)?;
        let start = template.run(&StateVector::zero(n)?)?;
        Ok(CircuitEnv {
            n,
            max_gates,
            table: ActionTable::new(n)?,
            featurizer,
            template,
            start,
            r_bounds: (family.r_min(), family.r_max()),
            hamiltonians: family
                .samples()
                .iter()
                .map(|(r, h)| (*r, h.compile()))
                .collect(),
            active: 0,
            state: None,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn max_gates(&self) -> usize {
        self.max_gates
    }

    pub fn actions(&self) -> &ActionTable {
        &self.table
    }

    pub fn featurizer(&self) -> &GaussianFeaturizer {
        &self.featurizer
    }

    pub fn obs_size(&self) -> usize {
        Observation::size(self.n, self.featurizer.len())
    }

    /// State after the prelude, before any agent gate.
    pub fn start_state(&self) -> &StateVector {
        &self.start
    }

    pub fn state(&self) -> Option<&EnvState> {
        self.state.as_ref()
    }

    pub fn is_done(&self) -> bool {
        self.state.as_ref().is_some_and(|s| s.t >= self.max_gates)
    }

    fn hamiltonian_for(&self, r: f64) -> (usize, bool) {
        let (idx, dist) = self
            .hamiltonians
            .iter()
            .enumerate()
            .map(|(i, (s, _))| (i, (s - r).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("family is never empty");
        (idx, dist >= R_MATCH_EPS)
    }

    pub fn reset(&mut self, r: f64) -> Result<Observation> {
        let (lo, hi) = self.r_bounds;
        if !(r.is_finite() && lo - R_MATCH_EPS <= r && r <= hi + R_MATCH_EPS) {
            return Err(Error::Invalid(format!(
                "parameter {r} outside family bounds [{lo}, {hi}]"
            )));
        }
        let (idx, nearest_fallback) = self.hamiltonian_for(r);
        let (hamiltonian_r, h) = &self.hamiltonians[idx];
        let energy = expectation_compiled(&self.start, h)?;
        let state = EnvState {
            psi: self.start.clone(),
            t: 0,
            r,
            circuit: self.template.clone(),
            energy,
            hamiltonian_r: *hamiltonian_r,
            nearest_fallback,
        };
        let obs = self.observe(&state);
        self.active = idx;
        self.state = Some(state);
        Ok(obs)
    }

    pub fn step(&mut self, action: HybridAction) -> Result<Transition> {
        let gate = self.table.decode(action)?;
        let max_gates = self.max_gates;
        let state = self
            .state
            .as_ref()
            .ok_or_else(|| Error::Invalid("step before reset".into()))?;
        if state.t >= max_gates {
            return Err(Error::Invalid("episode already finished".into()));
        }
        let obs = self.observe(state);
        let h = &self.hamiltonians[self.active].1;

        let mut next = state.clone();
        next.psi.apply(&gate)?;
        next.circuit.push(gate)?;
        next.t += 1;
        next.energy = expectation_compiled(&next.psi, h)?;
        let next_obs = self.observe(&next);
        let tr = Transition {
            obs,
            action,
            e_before: state.energy,
            e_after: next.energy,
            next_obs,
            done: next.t == max_gates,
            r: next.r,
        };
        self.state = Some(next);
        Ok(tr)
    }

    /// Energy of the current state.
    pub fn energy(&self) -> Option<f64> {
        self.state.as_ref().map(|s| s.energy)
    }

    fn observe(&self, state: &EnvState) -> Observation {
        let amps = state.psi.amplitudes();
        let mut v = Vec::with_capacity(self.obs_size());
        v.extend(amps.iter().map(|a| a.re));
        v.extend(amps.iter().map(|a| a.im));
        v.push(if self.max_gates > 1 {
            state.t as f64 / (self.max_gates - 1) as f64
        } else {
            0.0
        });
        v.extend(self.featurizer.featurize(state.r));
        Observation(v)
    }
}
