use std::collections::hash_map::{Entry, HashMap};

use serde::Serialize;

use super::run::to_net;
use crate::env::CircuitEnv;
use crate::error::{Error, Result};
use crate::hamiltonian::{exact_diagonalize, HamiltonianFamily, PauliSum, MAX_DENSE_QUBITS, R_MATCH_EPS};
use crate::nn::Scalar;
use crate::sac::SacAgent;
use crate::sim::{expectation, fidelity, preprocess_circuit, Circuit, GateKind, StateVector};

/// Prediction at one grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct PecPoint {
    pub r: f64,
    pub energy: f64,
    pub exact: Option<f64>,
    pub fidelity: Option<f64>,
    /// `r` is one of the training values.
    pub seen: bool,
    /// No Hamiltonian exists at `r`; the nearest sampled one was used.
    pub nearest_fallback: bool,
    pub circuit: Circuit,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct PecResult {
    pub points: Vec<PecPoint>,
}

impl PecResult {
    pub fn r_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.r).collect()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.energy).collect()
    }
}

/// `r_min, r_min + step, …` up to `r_max` inclusive, with values snapped to
/// a 1e-9 grid so repeated additions do not drift.
pub fn prediction_grid(r_min: f64, r_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) || !(r_min <= r_max) {
        return Err(Error::Invalid(format!(
            "bad prediction grid [{r_min}, {r_max}] step {step}"
        )));
    }
    let count = ((r_max - r_min) / step + 1e-6).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((r_min + i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

/// Grid for a run: the training values when `step` is zero, otherwise an
/// evenly spaced grid over the family's interval.
pub fn grid_for(family: &HamiltonianFamily, step: f64) -> Result<Vec<f64>> {
    if step == 0.0 {
        Ok(family.r_values())
    } else {
        prediction_grid(family.r_min(), family.r_max(), step)
    }
}

/// Deterministic episode at `r`; returns the final state and circuit.
pub fn deterministic_rollout<T: Scalar>(
    agent: &SacAgent<T>,
    env: &mut CircuitEnv,
    r: f64,
) -> Result<(StateVector, Circuit)> {
    let mut obs = env.reset(r)?;
    loop {
        let x: Vec<T> = to_net(&obs).into_iter().map(|v| T::of(v as f64)).collect();
        let tr = env.step(agent.actor.deterministic_action(&x)?)?;
        obs = tr.next_obs;
        if tr.done {
            break;
        }
    }
    let s = env.state().expect("episode ran");
    Ok((s.psi.clone(), s.circuit.clone()))
}

/// Predicts circuits and energies on `grid`.
///
/// Energies use `eval_family`'s Hamiltonian at each point when it has one,
/// then the training family's, then the nearest training sample (flagged).
/// Exact energies and ground-state fidelities are filled in when the
/// register is small enough for dense diagonalization.
pub fn predict_pec<T: Scalar>(
    agent: &SacAgent<T>,
    env: &mut CircuitEnv,
    training: &HamiltonianFamily,
    grid: &[f64],
    eval_family: Option<&HamiltonianFamily>,
) -> Result<PecResult> {
    let exact_ok = training.n_qubits() <= MAX_DENSE_QUBITS;
    let mut cache: HashMap<(usize, i64), (f64, StateVector)> = HashMap::new();
    let mut points = Vec::with_capacity(grid.len());
    for &r in grid {
        if !training.contains(r) {
            return Err(Error::Invalid(format!(
                "grid point {r} outside [{}, {}]",
                training.r_min(),
                training.r_max()
            )));
        }
        let (psi, circuit) = deterministic_rollout(agent, env, r)?;
        let (source, h_r, h, nearest_fallback): (usize, f64, &PauliSum, bool) =
            match (eval_family.and_then(|f| f.get(r)), training.get(r)) {
                (Some(h), _) => (1, r, h, false),
                (None, Some(h)) => (0, r, h, false),
                (None, None) => {
                    let (s, h) = training.nearest(r);
                    (0, s, h, true)
                }
            };
        let energy = expectation(&psi, h)?;
        let (exact, fid) = if exact_ok {
            let key = (source, (h_r * 1e9).round() as i64);
            let (e0, gs) = match cache.entry(key) {
                Entry::Occupied(o) => o.into_mut(),
                Entry::Vacant(v) => v.insert(exact_diagonalize(h)?),
            };
            (Some(*e0), Some(fidelity(&psi, gs)?))
        } else {
            (None, None)
        };
        points.push(PecPoint {
            r,
            energy,
            exact,
            fidelity: fid,
            seen: training.r_values().iter().any(|s| (s - r).abs() < R_MATCH_EPS),
            nearest_fallback,
            circuit,
        });
    }
    Ok(PecResult { points })
}

/// Gate counts and depth of one preprocessed circuit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CensusRow {
    pub r: f64,
    pub cnot: usize,
    pub rx: usize,
    pub ry: usize,
    pub rz: usize,
    pub depth: usize,
}

pub fn census_row(r: f64, circuit: &Circuit) -> Result<CensusRow> {
    let start = StateVector::zero(circuit.n)?;
    let c = preprocess_circuit(circuit, &start);
    Ok(CensusRow {
        r,
        cnot: c.count(GateKind::Cnot),
        rx: c.count(GateKind::Rx),
        ry: c.count(GateKind::Ry),
        rz: c.count(GateKind::Rz),
        depth: c.depth(),
    })
}

/// Per-point gate census after redundancy removal.
pub fn circuit_census(result: &PecResult) -> Result<Vec<CensusRow>> {
    result
        .points
        .iter()
        .map(|p| census_row(p.r, &p.circuit))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Gate;

    #[test]
    fn grids() {
        assert_eq!(prediction_grid(1.0, 1.3, 0.1).unwrap(), vec![1.0, 1.1, 1.2, 1.3]);
        assert_eq!(prediction_grid(1.0, 4.0, 0.01).unwrap().len(), 301);
        assert_eq!(prediction_grid(2.2, 2.2, 0.1).unwrap(), vec![2.2]);
        assert!(prediction_grid(1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn empty_circuit_census() {
        let row = census_row(1.0, &Circuit::new(3)).unwrap();
        assert_eq!((row.cnot, row.rx, row.ry, row.rz, row.depth), (0, 0, 0, 0, 0));
    }

    #[test]
    fn census_counts_after_preprocessing() {
        let mut c = Circuit::with_basis_prelude(2, "10").unwrap();
        for g in [
            Gate::cnot(0, 1),
            Gate::cnot(0, 1),
            Gate::ry(1, 0.2),
            Gate::ry(1, 0.3),
            Gate::cnot(1, 0),
        ] {
            c.push(g).unwrap();
        }
        let row = census_row(0.5, &c).unwrap();
        assert_eq!((row.cnot, row.ry), (1, 1));
        assert_eq!(row.depth, 2);
    }
}
