//! Pauli-sum Hamiltonians, parameterized families, the job-shop encoding and
//! the exact-diagonalization reference.

mod eigen;
mod family;
mod jsp;
mod pauli;

pub use eigen::{exact_diagonalize, jacobi_eigen, MAX_DENSE_QUBITS};
pub use family::{manifest_text, HamiltonianFamily, R_MATCH_EPS};
pub use jsp::JspInstance;
pub use pauli::{CompiledPauliSum, Pauli, PauliString, PauliSum, COEFF_EPS};
