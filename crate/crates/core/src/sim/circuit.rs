use std::fmt::Write as _;

use super::{Gate, GateKind, StateVector};
use crate::error::{Error, Result};

/// A fixed prelude followed by the agent-chosen gates.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub n: usize,
    pub prelude: Vec<Gate>,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Circuit {
            n,
            prelude: Vec::new(),
            gates: Vec::new(),
        }
    }

    /// Prelude of `RX(π)` on every qubit whose bit is set in `bits`, which
    /// prepares that basis state from `|0…0⟩` up to global phase.
    pub fn with_basis_prelude(n: usize, bits: &str) -> Result<Self> {
        if bits.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: bits.len(),
            });
        }
        super::state::parse_bitstring(bits)?;
        let prelude = bits
            .chars()
            .enumerate()
            .filter(|(_, c)| *c == '1')
            .map(|(q, _)| Gate::rx(q, std::f64::consts::PI))
            .collect();
        Ok(Circuit {
            n,
            prelude,
            gates: Vec::new(),
        })
    }

    pub fn all_gates(&self) -> impl Iterator<Item = &Gate> {
        self.prelude.iter().chain(&self.gates)
    }

    pub fn push(&mut self, g: Gate) -> Result<()> {
        g.validate(self.n)?;
        self.gates.push(g);
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.all_gates().try_for_each(|g| g.validate(self.n))
    }

    /// Applies prelude then gates to `start`.
    pub fn run(&self, start: &StateVector) -> Result<StateVector> {
        if start.n_qubits() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: start.n_qubits(),
            });
        }
        let mut s = start.clone();
        for g in self.all_gates() {
            s.apply(g)?;
        }
        Ok(s)
    }

    /// Greedy layer count over prelude and gates: every gate goes into the
    /// earliest layer after the last layer that touched one of its qubits.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.n];
        let mut depth = 0;
        for g in self.all_gates() {
            let layer = g.qubits().map(|q| level[q]).max().unwrap_or(0) + 1;
            for q in g.qubits() {
                level[q] = layer;
            }
            depth = depth.max(layer);
        }
        depth
    }

    /// Number of agent gates of `kind` (prelude excluded).
    pub fn count(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind == kind).count()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {}\nprelude {}\n", self.n, self.prelude.len());
        for g in self.all_gates() {
            let _ = writeln!(out, "{g}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut n = None;
        let mut prelude_len = None;
        let mut gates = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: line_no, msg };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let int = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| err(format!("expected a non-negative integer, got `{s}`")))
            };
            match fields.as_slice() {
                ["qubits", v] if n.is_none() => n = Some(int(v)?),
                ["prelude", v] if prelude_len.is_none() => prelude_len = Some(int(v)?),
                ["CNOT", c, t] => gates.push(Gate::cnot(int(c)?, int(t)?)),
                [op @ ("RX" | "RY" | "RZ"), q, a] => {
                    let angle: f64 = a
                        .parse()
                        .map_err(|_| err(format!("malformed angle `{a}`")))?;
                    let kind = match *op {
                        "RX" => GateKind::Rx,
                        "RY" => GateKind::Ry,
                        _ => GateKind::Rz,
                    };
                    gates.push(Gate::rotation(kind, int(q)?, angle));
                }
                _ => return Err(err(format!("unrecognized line `{line}`"))),
            }
            if let (Some(n), Some(g)) = (n, gates.last()) {
                g.validate(n).map_err(|e| err(e.to_string()))?;
            } else if !gates.is_empty() {
                return Err(err("gate before `qubits` header".into()));
            }
        }
        let n = n.ok_or(Error::Parse {
            line: 0,
            msg: "missing `qubits` header".into(),
        })?;
        let k = prelude_len.unwrap_or(0);
        if k > gates.len() {
            return Err(Error::Parse {
                line: 0,
                msg: format!("prelude {k} longer than the {} gates listed", gates.len()),
            });
        }
        let rest = gates.split_off(k);
        Ok(Circuit {
            n,
            prelude: gates,
            gates: rest,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::fidelity;
    use std::f64::consts::PI;

    #[test]
    fn empty_circuit_is_identity() {
        let start = StateVector::from_bitstring(3, "101").unwrap();
        assert_eq!(Circuit::new(3).run(&start).unwrap(), start);
        assert_eq!(Circuit::new(3).depth(), 0);
    }

    #[test]
    fn basis_prelude_prepares_hf_state() {
        let c = Circuit::with_basis_prelude(4, "1100").unwrap();
        assert_eq!(c.prelude, vec![Gate::rx(0, PI), Gate::rx(1, PI)]);
        let out = c.run(&StateVector::zero(4).unwrap()).unwrap();
        let hf = StateVector::from_bitstring(4, "1100").unwrap();
        assert!((fidelity(&out, &hf).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn depth_of_parallel_rotations() {
        let mut c = Circuit::new(2);
        c.push(Gate::rx(0, 0.1)).unwrap();
        c.push(Gate::ry(1, 0.2)).unwrap();
        assert_eq!(c.depth(), 1);
        c.push(Gate::cnot(0, 1)).unwrap();
        assert_eq!(c.depth(), 2);
    }

    #[test]
    fn text_format_round_trip() {
        let mut c = Circuit::with_basis_prelude(3, "110").unwrap();
        c.push(Gate::cnot(2, 0)).unwrap();
        c.push(Gate::rz(1, -0.123456789)).unwrap();
        let text = c.to_text();
        assert!(text.starts_with("qubits 3\nprelude 2\nRX 0 3.14159"));
        assert_eq!(Circuit::parse(&text).unwrap(), c);
    }

    #[test]
    fn parse_errors() {
        assert!(Circuit::parse("prelude 0\nCNOT 0 1\n").is_err());
        assert!(Circuit::parse("qubits 2\nCNOT 0 2\n").is_err());
        assert!(Circuit::parse("qubits 2\nRX 0 abc\n").is_err());
        assert!(Circuit::parse("qubits 2\nprelude 3\nRX 0 1\n").is_err());
        assert!(Circuit::parse("qubits 2\nH 0\n").is_err());
    }
}
