//! Independent reference implementations shared by the integration tests.
//!
//! Everything here is written against textbook definitions (Kronecker
//! products, explicit matrices, brute-force enumeration) and deliberately
//! avoids the library's own fast paths.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use qarl_core::hamiltonian::{HamiltonianFamily, Pauli, PauliString, PauliSum};
use qarl_core::sim::{Circuit, Gate, GateKind, StateVector};
use rand::Rng;

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Row-major dense matrix.
#[derive(Clone, Debug)]
pub struct Dense {
    pub dim: usize,
    pub a: Vec<C>,
}

impl Dense {
    pub fn identity(dim: usize) -> Self {
        let mut a = vec![c(0.0, 0.0); dim * dim];
        for i in 0..dim {
            a[i * dim + i] = c(1.0, 0.0);
        }
        Dense { dim, a }
    }

    pub fn from_rows(rows: &[&[C]]) -> Self {
        let dim = rows.len();
        Dense {
            dim,
            a: rows.iter().flat_map(|r| r.iter().copied()).collect(),
        }
    }

    pub fn kron(&self, other: &Dense) -> Dense {
        let dim = self.dim * other.dim;
        let mut a = vec![c(0.0, 0.0); dim * dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                for k in 0..other.dim {
                    for l in 0..other.dim {
                        a[(i * other.dim + k) * dim + j * other.dim + l] =
                            self.a[i * self.dim + j] * other.a[k * other.dim + l];
                    }
                }
            }
        }
        Dense { dim, a }
    }

    pub fn matvec(&self, v: &[C]) -> Vec<C> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.a[i * self.dim + j] * v[j]).sum())
            .collect()
    }

    pub fn add_scaled(&mut self, s: f64, other: &Dense) {
        for (x, y) in self.a.iter_mut().zip(&other.a) {
            *x += y * s;
        }
    }
}

pub fn pauli_matrix(p: Pauli) -> Dense {
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    match p {
        Pauli::I => Dense::from_rows(&[&[l, o], &[o, l]]),
        Pauli::X => Dense::from_rows(&[&[o, l], &[l, o]]),
        Pauli::Y => Dense::from_rows(&[&[o, -i], &[i, o]]),
        Pauli::Z => Dense::from_rows(&[&[l, o], &[o, -l]]),
    }
}

/// `⊗_q M_q` with qubit 0 as the leftmost (most significant) factor.
pub fn kron_all(factors: &[Dense]) -> Dense {
    factors
        .iter()
        .skip(1)
        .fold(factors[0].clone(), |acc, f| acc.kron(f))
}

pub fn dense_pauli_sum(h: &PauliSum) -> Dense {
    let n = h.n_qubits();
    let mut out = Dense {
        dim: 1 << n,
        a: vec![c(0.0, 0.0); 1 << (2 * n)],
    };
    for (coeff, p) in h.terms() {
        let factors: Vec<Dense> = p.ops().into_iter().map(pauli_matrix).collect();
        out.add_scaled(*coeff, &kron_all(&factors));
    }
    out
}

/// Single-qubit rotation `exp(−iθP/2) = cos(θ/2)·I − i·sin(θ/2)·P`.
pub fn rotation_matrix(kind: GateKind, theta: f64) -> Dense {
    let p = match kind {
        GateKind::Rx => Pauli::X,
        GateKind::Ry => Pauli::Y,
        GateKind::Rz => Pauli::Z,
        GateKind::Cnot => panic!("not a rotation"),
    };
    let mut m = Dense::identity(2);
    m.a.iter_mut().for_each(|v| *v *= (theta / 2.0).cos());
    let pm = pauli_matrix(p);
    for (x, y) in m.a.iter_mut().zip(&pm.a) {
        *x += y * c(0.0, -(theta / 2.0).sin());
    }
    m
}

/// Full-register matrix of one gate.
pub fn dense_gate(n: usize, g: &Gate) -> Dense {
    match g.kind {
        GateKind::Cnot => {
            // |0⟩⟨0|_c ⊗ I + |1⟩⟨1|_c ⊗ X_t
            let (o, l) = (c(0.0, 0.0), c(1.0, 0.0));
            let p0 = Dense::from_rows(&[&[l, o], &[o, o]]);
            let p1 = Dense::from_rows(&[&[o, o], &[o, l]]);
            let ctrl = g.control.unwrap();
            let first: Vec<Dense> = (0..n)
                .map(|q| if q == ctrl { p0.clone() } else { Dense::identity(2) })
                .collect();
            let second: Vec<Dense> = (0..n)
                .map(|q| {
                    if q == ctrl {
                        p1.clone()
                    } else if q == g.target {
                        pauli_matrix(Pauli::X)
                    } else {
                        Dense::identity(2)
                    }
                })
                .collect();
            let mut m = kron_all(&first);
            m.add_scaled(1.0, &kron_all(&second));
            m
        }
        kind => {
            let factors: Vec<Dense> = (0..n)
                .map(|q| {
                    if q == g.target {
                        rotation_matrix(kind, g.angle.unwrap())
                    } else {
                        Dense::identity(2)
                    }
                })
                .collect();
            kron_all(&factors)
        }
    }
}

pub fn dense_expectation(h: &Dense, psi: &[C]) -> f64 {
    let hv = h.matvec(psi);
    psi.iter().zip(&hv).map(|(a, b)| a.conj() * b).sum::<C>().re
}

pub fn random_state<R: Rng>(n: usize, rng: &mut R) -> StateVector {
    let amps: Vec<C> = (0..1 << n)
        .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    StateVector::from_amplitudes_normalized(n, amps).unwrap()
}

pub fn random_pauli_string<R: Rng>(n: usize, rng: &mut R) -> PauliString {
    let ops: Vec<Pauli> = (0..n)
        .map(|_| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..4)])
        .collect();
    PauliString::new(&ops).unwrap()
}

/// `terms` random strings with coefficients uniform in `(−scale, scale)`.
pub fn random_pauli_sum<R: Rng>(n: usize, terms: usize, scale: f64, rng: &mut R) -> PauliSum {
    PauliSum::new(
        n,
        (0..terms).map(|_| (rng.gen_range(-scale..scale), random_pauli_string(n, rng))),
    )
    .unwrap()
}

pub fn random_gate<R: Rng>(n: usize, rng: &mut R) -> Gate {
    if n >= 2 && rng.gen_bool(0.35) {
        let control = rng.gen_range(0..n);
        let target = (control + rng.gen_range(1..n)) % n;
        Gate::cnot(control, target)
    } else {
        let kind = [GateKind::Rx, GateKind::Ry, GateKind::Rz][rng.gen_range(0..3)];
        let angle = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        Gate::rotation(kind, rng.gen_range(0..n), angle)
    }
}

/// Circuit whose gates are drawn to exercise every redundancy rule: repeated
/// CNOTs, same-axis rotation runs and gates on idle qubits.
pub fn redundant_circuit<R: Rng>(n: usize, max_gates: usize, rng: &mut R) -> Circuit {
    let mut circuit = Circuit::new(n);
    let count = rng.gen_range(0..=max_gates);
    while circuit.gates.len() < count {
        let g = match (circuit.gates.last(), rng.gen_range(0..4)) {
            (Some(prev), 0) if prev.kind == GateKind::Cnot => *prev,
            (Some(prev), 1) if prev.kind != GateKind::Cnot => {
                Gate::rotation(prev.kind, prev.target, rng.gen_range(-4.0..4.0))
            }
            _ => random_gate(n, rng),
        };
        circuit.push(g).unwrap();
    }
    circuit
}

pub fn max_abs_diff(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Job-shop objective evaluated directly on a bit assignment: penalty for
/// each job not on exactly one machine, penalty for unbalanced machine loads
/// against the slack variables, and the makespan weight on machine 0.
pub fn jsp_objective(
    lengths: &[u32],
    machines: usize,
    max_diff: usize,
    a: f64,
    b: f64,
    bits: &[u8],
) -> f64 {
    let jobs = lengths.len();
    let x = |i: usize, m: usize| bits[m * jobs + i] as f64;
    let y = |d: usize, m: usize| bits[jobs * machines + (m - 1) * max_diff + (d - 1)] as f64;
    let mut e = 0.0;
    for i in 0..jobs {
        let s: f64 = (0..machines).map(|m| x(i, m)).sum();
        e += a * (1.0 - s).powi(2);
    }
    for m in 1..machines {
        let slack: f64 = (1..=max_diff).map(|d| d as f64 * y(d, m)).sum();
        let load: f64 = (0..jobs).map(|i| lengths[i] as f64 * (x(i, m) - x(i, 0))).sum();
        e += a * (slack + load).powi(2);
    }
    e + b * (0..jobs).map(|i| lengths[i] as f64 * x(i, 0)).sum::<f64>()
}

/// Bits of basis index `idx` in qubit order (qubit 0 first).
pub fn bits_of(idx: usize, n: usize) -> Vec<u8> {
    (0..n).map(|q| ((idx >> (n - 1 - q)) & 1) as u8).collect()
}

/// Central finite-difference gradient of `f` at `x`.
pub fn fd_gradient(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|i| {
            p[i] = x[i] + h;
            let up = f(&p);
            p[i] = x[i] - h;
            let down = f(&p);
            p[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, zero when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}

/// `H(R) = R·Z₀ + (1 − R)·Z₁ − 0.2·Z₀Z₁`, ground energy −1.2 at |11⟩ for R ∈ [0, 1].
pub fn synthetic_hamiltonian(r: f64) -> PauliSum {
    PauliSum::parse(&format!("{r:?} ZI\n{:?} IZ\n-0.2 ZZ\n", 1.0 - r)).unwrap()
}

pub fn synthetic_family(rs: &[f64]) -> HamiltonianFamily {
    let lo = rs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = rs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    HamiltonianFamily::new(lo, hi, rs.iter().map(|&r| (r, synthetic_hamiltonian(r))).collect())
        .unwrap()
}

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}
