use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::sim::{Gate, GateKind};

/// Discrete gate placement with its continuous angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HybridAction {
    pub d: usize,
    pub c: f64,
}

/// Indexed array encoding of all gate placements on `n` qubits.
///
/// Each entry is `[control, target, rotation qubit, rotation axis]`; a
/// control of `n` means "no CNOT" (target 0), a rotation qubit of `n` means
/// "no rotation" (axis 0). CNOTs come first, ordered by target then control;
/// rotations follow, grouped by qubit with axes x, y, z.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionTable {
    n: usize,
    entries: Vec<[usize; 4]>,
}

impl ActionTable {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Invalid(format!(
                "action table needs at least two qubits, got {n}"
            )));
        }
        let mut entries = Vec::with_capacity(n * (n - 1) + 3 * n);
        for target in 0..n {
            for control in (0..n).filter(|&c| c != target) {
                entries.push([control, target, n, 0]);
            }
        }
        for q in 0..n {
            for axis in 1..=3 {
                entries.push([n, 0, q, axis]);
            }
        }
        Ok(ActionTable { n, entries })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[[usize; 4]] {
        &self.entries
    }

    pub fn is_cnot(&self, d: usize) -> bool {
        self.entries.get(d).is_some_and(|e| e[0] != self.n)
    }

    /// Gate for `a`; the angle is ignored for CNOT entries.
    pub fn decode(&self, a: HybridAction) -> Result<Gate> {
        let [control, target, rot_qubit, axis] = *self.entries.get(a.d).ok_or(Error::OutOfRange {
            index: a.d,
            limit: self.entries.len(),
        })?;
        if control != self.n {
            return Ok(Gate::cnot(control, target));
        }
        if !(a.c.is_finite() && a.c > -PI - 1e-12 && a.c <= PI + 1e-12) {
            return Err(Error::Invalid(format!("angle {} outside (−π, π]", a.c)));
        }
        let kind = GateKind::from_axis(axis).expect("table holds valid axes");
        Ok(Gate::rotation(kind, rot_qubit, a.c))
    }
}
