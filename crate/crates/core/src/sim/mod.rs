//! Dense state-vector simulation over the gate set `{CNOT, RX, RY, RZ}`.

mod circuit;
mod gate;
mod preprocess;
mod state;

pub use circuit::Circuit;
pub use gate::{wrap_angle, Gate, GateKind};
pub use preprocess::preprocess_circuit;
pub use state::{
    expectation, expectation_compiled, fidelity, StateVector, EXPECTATION_IM_TOL,
    MAX_SIM_QUBITS, NORM_TOL,
};
