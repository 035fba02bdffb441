//! Pauli strings and weighted Pauli sums.
//!
//! Qubit `q` of an `n`-qubit register maps to bit `n - 1 - q` of a basis
//! index, so the leftmost character of a Pauli string (and of a basis label)
//! is qubit 0.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Terms whose merged coefficient falls below this magnitude are dropped.
pub const COEFF_EPS: f64 = 1e-12;

/// Largest register a Pauli string can address through its bit masks.
pub const MAX_PAULI_QUBITS: usize = 63;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-qubit Paulis, stored as bit masks.
///
/// `x_mask` marks X and Y positions, `z_mask` marks Z and Y positions, so
/// `P|b⟩ = i^{#Y} (-1)^{popcount(b & z_mask)} |b ^ x_mask⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x_mask: u64,
    z_mask: u64,
}

impl PauliString {
    pub fn new(ops: &[Pauli]) -> Result<Self> {
        let n = ops.len();
        if n == 0 || n > MAX_PAULI_QUBITS {
            return Err(Error::Invalid(format!(
                "pauli string length {n} outside 1..={MAX_PAULI_QUBITS}"
            )));
        }
        let mut x_mask = 0u64;
        let mut z_mask = 0u64;
        for (q, op) in ops.iter().enumerate() {
            let bit = 1u64 << (n - 1 - q);
            match op {
                Pauli::I => {}
                Pauli::X => x_mask |= bit,
                Pauli::Z => z_mask |= bit,
                Pauli::Y => {
                    x_mask |= bit;
                    z_mask |= bit;
                }
            }
        }
        Ok(PauliString { n, x_mask, z_mask })
    }

    /// Identity on `n` qubits.
    pub fn identity(n: usize) -> Result<Self> {
        PauliString::new(&vec![Pauli::I; n])
    }

    /// Product of Z operators on the listed qubits.
    pub fn zs(n: usize, qubits: &[usize]) -> Result<Self> {
        let mut ops = vec![Pauli::I; n];
        for &q in qubits {
            if q >= n {
                return Err(Error::OutOfRange { index: q, limit: n });
            }
            ops[q] = Pauli::Z;
        }
        PauliString::new(&ops)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> u64 {
        self.x_mask
    }

    pub fn z_mask(&self) -> u64 {
        self.z_mask
    }

    pub fn y_count(&self) -> u32 {
        (self.x_mask & self.z_mask).count_ones()
    }

    pub fn is_diagonal(&self) -> bool {
        self.x_mask == 0
    }

    pub fn op(&self, q: usize) -> Pauli {
        let bit = 1u64 << (self.n - 1 - q);
        match (self.x_mask & bit != 0, self.z_mask & bit != 0) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (false, true) => Pauli::Z,
            (true, true) => Pauli::Y,
        }
    }

    pub fn ops(&self) -> Vec<Pauli> {
        (0..self.n).map(|q| self.op(q)).collect()
    }

    /// `i^{#Y}` as a complex number.
    pub fn y_phase(&self) -> Complex64 {
        match self.y_count() % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    fn sort_key(&self) -> (u64, u64) {
        (self.x_mask, self.z_mask)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n {
            write!(f, "{}", self.op(q).as_char())?;
        }
        Ok(())
    }
}

impl std::str::FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let ops = s
            .chars()
            .map(|c| {
                Pauli::from_char(c)
                    .ok_or_else(|| Error::Invalid(format!("illegal pauli symbol '{c}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        PauliString::new(&ops)
    }
}

/// A real-weighted sum of Pauli strings on a fixed register.
///
/// Construction merges duplicate strings, drops negligible coefficients and
/// orders terms by `(x_mask, z_mask)`, which puts all diagonal terms first.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: Vec<(f64, PauliString)>,
}

impl PauliSum {
    pub fn new(n: usize, terms: impl IntoIterator<Item = (f64, PauliString)>) -> Result<Self> {
        let mut merged: BTreeMap<(u64, u64), (f64, PauliString)> = BTreeMap::new();
        for (c, p) in terms {
            if p.n_qubits() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: p.n_qubits(),
                });
            }
            if !c.is_finite() {
                return Err(Error::Invalid(format!("non-finite coefficient for {p}")));
            }
            merged.entry(p.sort_key()).or_insert((0.0, p)).0 += c;
        }
        let terms = merged
            .into_values()
            .filter(|(c, _)| c.abs() >= COEFF_EPS)
            .collect();
        Ok(PauliSum { n, terms })
    }

    /// Parses the line format `<coefficient> <pauli string>`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut n = None;
        let mut terms = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let (coeff, label) = match (fields.next(), fields.next(), fields.next()) {
                (Some(c), Some(p), None) => (c, p),
                _ => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "expected `<coefficient> <pauli string>`".into(),
                    })
                }
            };
            let coeff: f64 = coeff.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("malformed coefficient `{coeff}`"),
            })?;
            let pauli: PauliString = label.parse().map_err(|e: Error| Error::Parse {
                line: line_no,
                msg: e.to_string(),
            })?;
            match n {
                None => n = Some(pauli.n_qubits()),
                Some(n) if n != pauli.n_qubits() => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!(
                            "pauli string length {} differs from {n}",
                            pauli.n_qubits()
                        ),
                    })
                }
                _ => {}
            }
            terms.push((coeff, pauli));
        }
        let n = n.ok_or(Error::Parse {
            line: 0,
            msg: "no terms".into(),
        })?;
        PauliSum::new(n, terms)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (c, p) in &self.terms {
            out.push_str(&format!("{c:.17e} {p}\n"));
        }
        out
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        1usize << self.n
    }

    pub fn is_diagonal(&self) -> bool {
        self.terms.iter().all(|(_, p)| p.is_diagonal())
    }

    /// True when every term carries an even number of Y factors, i.e. the
    /// matrix is real symmetric in the computational basis.
    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|(_, p)| p.y_count() % 2 == 0)
    }

    /// Sum of absolute coefficients; bounds the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.abs()).sum()
    }

    /// Diagonal entries of the diagonal terms.
    pub fn diagonal(&self) -> Vec<f64> {
        let mut diag = vec![0.0; self.dim()];
        for (c, p) in self.terms.iter().filter(|(_, p)| p.is_diagonal()) {
            for (b, d) in diag.iter_mut().enumerate() {
                let sign = if (b as u64 & p.z_mask()).count_ones().is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                };
                *d += c * sign;
            }
        }
        diag
    }

    /// `H|ψ⟩`.
    pub fn apply(&self, amps: &[Complex64]) -> Result<Vec<Complex64>> {
        if amps.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: amps.len(),
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
        for (c, p) in &self.terms {
            let phase = p.y_phase() * *c;
            for (b, a) in amps.iter().enumerate() {
                let sign = if (b as u64 & p.z_mask()).count_ones().is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                };
                out[b ^ p.x_mask() as usize] += phase * sign * a;
            }
        }
        Ok(out)
    }

    /// Dense row-major matrix, `dim × dim`.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let dim = self.dim();
        let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (c, p) in &self.terms {
            let phase = p.y_phase() * *c;
            for col in 0..dim {
                let row = col ^ p.x_mask() as usize;
                let sign = if (col as u64 & p.z_mask()).count_ones().is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                };
                m[row * dim + col] += phase * sign;
            }
        }
        m
    }

    /// Precomputes a fast evaluation form for repeated expectation values.
    pub fn compile(&self) -> CompiledPauliSum {
        let mut groups: BTreeMap<u64, Vec<(Complex64, u64)>> = BTreeMap::new();
        for (c, p) in self.terms.iter().filter(|(_, p)| !p.is_diagonal()) {
            groups
                .entry(p.x_mask())
                .or_default()
                .push((p.y_phase() * *c, p.z_mask()));
        }
        CompiledPauliSum {
            n: self.n,
            diagonal: self.diagonal(),
            off_diagonal: groups.into_iter().collect(),
        }
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Evaluation form of a [`PauliSum`]: the full diagonal plus off-diagonal
/// terms grouped by their bit-flip mask.
#[derive(Clone, Debug)]
pub struct CompiledPauliSum {
    n: usize,
    diagonal: Vec<f64>,
    off_diagonal: Vec<(u64, Vec<(Complex64, u64)>)>,
}

impl CompiledPauliSum {
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// `⟨ψ|H|ψ⟩` as a complex number; the imaginary part is rounding residue
    /// for a Hermitian sum.
    pub fn expectation(&self, amps: &[Complex64]) -> Result<Complex64> {
        if amps.len() != self.diagonal.len() {
            return Err(Error::Dimension {
                expected: self.diagonal.len(),
                got: amps.len(),
            });
        }
        let mut acc = Complex64::new(
            amps.iter()
                .zip(&self.diagonal)
                .map(|(a, d)| a.norm_sqr() * d)
                .sum(),
            0.0,
        );
        for (x_mask, terms) in &self.off_diagonal {
            let x = *x_mask as usize;
            for (b, a) in amps.iter().enumerate() {
                let mut weight = Complex64::new(0.0, 0.0);
                for (coeff, z_mask) in terms {
                    if (b as u64 & z_mask).count_ones().is_multiple_of(2) {
                        weight += coeff;
                    } else {
                        weight -= coeff;
                    }
                }
                acc += amps[b ^ x].conj() * weight * a;
            }
        }
        Ok(acc)
    }
}
