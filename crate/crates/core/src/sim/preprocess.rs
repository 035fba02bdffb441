//! Redundancy removal for agent-built circuits.
//!
//! Three rewrites run to a fixpoint on the agent gates (the prelude is kept
//! verbatim but is taken into account when tracking qubit states):
//!
//! 1. `CNOT(i, j) CNOT(i, j)` with no gate on `i` or `j` in between cancels.
//! 2. A CNOT whose control qubit is provably `|0⟩` is dropped. A qubit is
//!    provably `|0⟩` when the start state factorizes with that qubit in `|0⟩`
//!    and no earlier surviving gate touched it.
//! 3. Same-axis rotations that follow each other on one qubit merge, with the
//!    summed angle wrapped into `(−π, π]`.
//!
//! Every rewrite preserves the prepared state up to global phase.

use super::{wrap_angle, Circuit, Gate, GateKind, StateVector};

pub fn preprocess_circuit(c: &Circuit, start: &StateVector) -> Circuit {
    let zero_at_start: Vec<bool> = (0..c.n).map(|q| qubit_is_zero(start, q)).collect();
    let mut gates = c.gates.clone();
    loop {
        let before = gates.len();
        drop_idle_controls(&c.prelude, &mut gates, &zero_at_start);
        cancel_cnot_pairs(&mut gates);
        merge_rotations(&mut gates);
        if gates.len() == before {
            break;
        }
    }
    Circuit {
        n: c.n,
        prelude: c.prelude.clone(),
        gates,
    }
}

fn qubit_is_zero(s: &StateVector, q: usize) -> bool {
    if q >= s.n_qubits() {
        return false;
    }
    let bit = 1usize << (s.n_qubits() - 1 - q);
    s.amplitudes()
        .iter()
        .enumerate()
        .all(|(i, a)| i & bit == 0 || a.norm_sqr() == 0.0)
}

fn drop_idle_controls(prelude: &[Gate], gates: &mut Vec<Gate>, zero_at_start: &[bool]) {
    let mut idle = zero_at_start.to_vec();
    for g in prelude {
        g.qubits().for_each(|q| idle[q] = false);
    }
    gates.retain(|g| {
        if g.kind == GateKind::Cnot && idle[g.control.expect("CNOT has a control")] {
            return false;
        }
        g.qubits().for_each(|q| idle[q] = false);
        true
    });
}

/// Index of the next gate after `i` that touches qubit `q`.
fn next_on(gates: &[Gate], i: usize, q: usize) -> Option<usize> {
    (i + 1..gates.len()).find(|&j| gates[j].acts_on(q))
}

fn cancel_cnot_pairs(gates: &mut Vec<Gate>) {
    let mut i = 0;
    while i < gates.len() {
        let g = gates[i];
        if g.kind == GateKind::Cnot {
            let c = g.control.expect("CNOT has a control");
            if let Some(j) = next_on(gates, i, c) {
                if next_on(gates, i, g.target) == Some(j) && gates[j] == g {
                    gates.remove(j);
                    gates.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }
}

fn merge_rotations(gates: &mut Vec<Gate>) {
    let mut i = 0;
    while i < gates.len() {
        let g = gates[i];
        if g.kind.is_rotation() {
            if let Some(j) = next_on(gates, i, g.target) {
                if gates[j].kind == g.kind {
                    let sum = g.angle.unwrap_or(0.0) + gates[j].angle.unwrap_or(0.0);
                    gates[i].angle = Some(wrap_angle(sum));
                    gates.remove(j);
                    continue;
                }
            }
        }
        i += 1;
    }
}
