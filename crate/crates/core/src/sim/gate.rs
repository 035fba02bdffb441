use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    Cnot,
    Rx,
    Ry,
    Rz,
}

impl GateKind {
    pub fn is_rotation(self) -> bool {
        !matches!(self, GateKind::Cnot)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Cnot => "CNOT",
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
        }
    }

    /// Rotation from an axis code, `1 → x`, `2 → y`, `3 → z`.
    pub fn from_axis(axis: usize) -> Option<GateKind> {
        match axis {
            1 => Some(GateKind::Rx),
            2 => Some(GateKind::Ry),
            3 => Some(GateKind::Rz),
            _ => None,
        }
    }
}

/// A gate from `{CNOT, RX, RY, RZ}` with `R_P(θ) = exp(−iθP/2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub control: Option<usize>,
    pub target: usize,
    pub angle: Option<f64>,
}

impl Gate {
    pub fn cnot(control: usize, target: usize) -> Self {
        Gate {
            kind: GateKind::Cnot,
            control: Some(control),
            target,
            angle: None,
        }
    }

    pub fn rotation(kind: GateKind, qubit: usize, angle: f64) -> Self {
        debug_assert!(kind.is_rotation());
        Gate {
            kind,
            control: None,
            target: qubit,
            angle: Some(angle),
        }
    }

    pub fn rx(qubit: usize, angle: f64) -> Self {
        Gate::rotation(GateKind::Rx, qubit, angle)
    }

    pub fn ry(qubit: usize, angle: f64) -> Self {
        Gate::rotation(GateKind::Ry, qubit, angle)
    }

    pub fn rz(qubit: usize, angle: f64) -> Self {
        Gate::rotation(GateKind::Rz, qubit, angle)
    }

    /// Qubits the gate acts on.
    pub fn qubits(&self) -> impl Iterator<Item = usize> {
        self.control.into_iter().chain(std::iter::once(self.target))
    }

    pub fn acts_on(&self, q: usize) -> bool {
        self.target == q || self.control == Some(q)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        for q in self.qubits() {
            if q >= n {
                return Err(Error::OutOfRange { index: q, limit: n });
            }
        }
        match (self.kind, self.control, self.angle) {
            (GateKind::Cnot, Some(c), None) if c != self.target => Ok(()),
            (GateKind::Cnot, _, _) => Err(Error::Invalid(format!(
                "CNOT needs distinct control and target and no angle: {self}"
            ))),
            (_, None, Some(a)) if a.is_finite() => Ok(()),
            _ => Err(Error::Invalid(format!(
                "rotation needs a finite angle and no control: {self}"
            ))),
        }
    }

    /// Row-major single-qubit matrix of a rotation.
    pub(crate) fn matrix_2x2(&self) -> [Complex64; 4] {
        let theta = self.angle.unwrap_or(0.0);
        let (s, c) = (theta / 2.0).sin_cos();
        let z = Complex64::new(0.0, 0.0);
        match self.kind {
            GateKind::Rx => [c.into(), Complex64::new(0.0, -s), Complex64::new(0.0, -s), c.into()],
            GateKind::Ry => [c.into(), (-s).into(), s.into(), c.into()],
            GateKind::Rz => [Complex64::new(c, -s), z, z, Complex64::new(c, s)],
            GateKind::Cnot => unreachable!("CNOT has no single-qubit matrix"),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.control, self.angle) {
            (Some(c), _) => write!(f, "{} {} {}", self.kind.name(), c, self.target),
            (None, Some(a)) => write!(f, "{} {} {:?}", self.kind.name(), self.target, a),
            (None, None) => write!(f, "{} {}", self.kind.name(), self.target),
        }
    }
}

/// Maps an angle into `(−π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut t = theta % two_pi;
    if t <= -PI {
        t += two_pi;
    } else if t > PI {
        t -= two_pi;
    }
    t
}
