use num_complex::Complex64;

use super::{Gate, GateKind};
use crate::error::{Error, Result};
use crate::hamiltonian::{CompiledPauliSum, PauliSum};

/// Norm tolerance for states produced by unitary evolution.
pub const NORM_TOL: f64 = 1e-9;

/// Largest register the simulator will allocate.
pub const MAX_SIM_QUBITS: usize = 24;

/// Dense `2^n` amplitude vector. Basis index bit `n - 1 - q` holds qubit `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n: usize) -> Result<Self> {
        StateVector::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if n == 0 || n > MAX_SIM_QUBITS {
            return Err(Error::Invalid(format!(
                "qubit count {n} outside 1..={MAX_SIM_QUBITS}"
            )));
        }
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::OutOfRange { index, limit: dim });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    /// Computational basis state from a label such as `"1100"` (qubit 0 first).
    pub fn from_bitstring(n: usize, bits: &str) -> Result<Self> {
        let index = parse_bitstring(bits)?;
        if bits.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: bits.len(),
            });
        }
        StateVector::basis(n, index)
    }

    /// Wraps amplitudes that must already be unit-norm.
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_len(n, &amps)?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Numerical(format!("state norm² {norm} ≠ 1")));
        }
        Ok(StateVector { n, amps })
    }

    pub fn from_amplitudes_normalized(n: usize, mut amps: Vec<Complex64>) -> Result<Self> {
        check_len(n, &amps)?;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Numerical("cannot normalize zero vector".into()));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(StateVector { n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies `g` in place.
    pub fn apply(&mut self, g: &Gate) -> Result<()> {
        g.validate(self.n)?;
        let n = self.n;
        let bit = |q: usize| 1usize << (n - 1 - q);
        match g.kind {
            GateKind::Cnot => {
                let cb = bit(g.control.expect("validated"));
                let tb = bit(g.target);
                for i in 0..self.amps.len() {
                    if i & cb != 0 && i & tb == 0 {
                        self.amps.swap(i, i | tb);
                    }
                }
            }
            GateKind::Rx | GateKind::Ry | GateKind::Rz => {
                let m = g.matrix_2x2();
                let tb = bit(g.target);
                for i0 in 0..self.amps.len() {
                    if i0 & tb != 0 {
                        continue;
                    }
                    let i1 = i0 | tb;
                    let (a0, a1) = (self.amps[i0], self.amps[i1]);
                    self.amps[i0] = m[0] * a0 + m[1] * a1;
                    self.amps[i1] = m[2] * a0 + m[3] * a1;
                }
            }
        }
        Ok(())
    }

    pub fn applied(mut self, g: &Gate) -> Result<Self> {
        self.apply(g)?;
        Ok(self)
    }

    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: other.n,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// Imaginary residue allowed in an expectation value before it is reported.
pub const EXPECTATION_IM_TOL: f64 = 1e-9;

/// `⟨ψ|H|ψ⟩`.
pub fn expectation(s: &StateVector, h: &PauliSum) -> Result<f64> {
    expectation_compiled(s, &h.compile())
}

pub fn expectation_compiled(s: &StateVector, h: &CompiledPauliSum) -> Result<f64> {
    if s.n_qubits() != h.n_qubits() {
        return Err(Error::Dimension {
            expected: h.n_qubits(),
            got: s.n_qubits(),
        });
    }
    let z = h.expectation(s.amplitudes())?;
    if z.im.abs() > EXPECTATION_IM_TOL * (1.0 + z.re.abs()) {
        return Err(Error::Numerical(format!(
            "expectation has imaginary part {}",
            z.im
        )));
    }
    Ok(z.re)
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

pub(crate) fn parse_bitstring(bits: &str) -> Result<usize> {
    if bits.is_empty() || bits.len() > MAX_SIM_QUBITS {
        return Err(Error::Invalid(format!("bad basis label `{bits}`")));
    }
    bits.chars().try_fold(0usize, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        _ => Err(Error::Invalid(format!("bad basis label `{bits}`"))),
    })
}

fn check_len(n: usize, amps: &[Complex64]) -> Result<()> {
    if n == 0 || n > MAX_SIM_QUBITS {
        return Err(Error::Invalid(format!(
            "qubit count {n} outside 1..={MAX_SIM_QUBITS}"
        )));
    }
    if amps.len() != 1 << n {
        return Err(Error::Dimension {
            expected: 1 << n,
            got: amps.len(),
        });
    }
    Ok(())
}
