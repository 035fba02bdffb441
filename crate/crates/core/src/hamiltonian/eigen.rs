//! Exact ground states by dense diagonalization.

use num_complex::Complex64;

use super::PauliSum;
use crate::error::{Error, Result};
use crate::sim::StateVector;

/// Largest register accepted for dense diagonalization.
pub const MAX_DENSE_QUBITS: usize = 12;

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.
///
/// `a` is row-major `dim × dim` and is destroyed. Returns eigenvalues and the
/// eigenvector matrix `v` (column `j` belongs to eigenvalue `j`), unsorted.
pub fn jacobi_eigen(a: &mut [f64], dim: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if a.len() != dim * dim {
        return Err(Error::Dimension {
            expected: dim * dim,
            got: a.len(),
        });
    }
    let mut v = vec![0.0; dim * dim];
    for i in 0..dim {
        v[i * dim + i] = 1.0;
    }
    let total: f64 = a.iter().map(|x| x * x).sum();
    let tol = f64::EPSILON * f64::EPSILON * total.max(f64::MIN_POSITIVE);
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..dim {
            for q in p + 1..dim {
                off += a[p * dim + q] * a[p * dim + q];
            }
        }
        if off <= tol {
            return Ok(((0..dim).map(|i| a[i * dim + i]).collect(), v));
        }
        for p in 0..dim {
            for q in p + 1..dim {
                let apq = a[p * dim + q];
                if apq.abs() < f64::MIN_POSITIVE {
                    continue;
                }
                let app = a[p * dim + p];
                let aqq = a[q * dim + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..dim {
                    let akp = a[k * dim + p];
                    let akq = a[k * dim + q];
                    a[k * dim + p] = c * akp - s * akq;
                    a[k * dim + q] = s * akp + c * akq;
                }
                for k in 0..dim {
                    let apk = a[p * dim + k];
                    let aqk = a[q * dim + k];
                    a[p * dim + k] = c * apk - s * aqk;
                    a[q * dim + k] = s * apk + c * aqk;
                }
                for k in 0..dim {
                    let vkp = v[k * dim + p];
                    let vkq = v[k * dim + q];
                    v[k * dim + p] = c * vkp - s * vkq;
                    v[k * dim + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    Err(Error::Numerical(format!(
        "Jacobi iteration did not converge in {MAX_SWEEPS} sweeps"
    )))
}

/// Lowest eigenvalue of `h` with a unit-norm eigenvector.
///
/// Diagonal sums are scanned directly; real sums use real Jacobi on
/// `2^n × 2^n`; complex Hermitian sums `A + iB` use the real symmetric
/// embedding `[[A, −B], [B, A]]`.
pub fn exact_diagonalize(h: &PauliSum) -> Result<(f64, StateVector)> {
    let n = h.n_qubits();
    if n > MAX_DENSE_QUBITS {
        return Err(Error::Invalid(format!(
            "{n} qubits exceeds the dense diagonalization cap of {MAX_DENSE_QUBITS}"
        )));
    }
    let dim = h.dim();
    if h.is_diagonal() {
        let diag = h.diagonal();
        let (idx, e) = diag
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, e)| (i, *e))
            .expect("nonempty diagonal");
        return Ok((e, StateVector::basis(n, idx)?));
    }
    let dense = h.to_dense();
    let (size, mut real) = if h.is_real() {
        (dim, dense.iter().map(|z| z.re).collect::<Vec<_>>())
    } else {
        let size = 2 * dim;
        let mut m = vec![0.0; size * size];
        for r in 0..dim {
            for c in 0..dim {
                let z = dense[r * dim + c];
                m[r * size + c] = z.re;
                m[(r + dim) * size + c + dim] = z.re;
                m[r * size + c + dim] = -z.im;
                m[(r + dim) * size + c] = z.im;
            }
        }
        (size, m)
    };
    let (vals, vecs) = jacobi_eigen(&mut real, size)?;
    let (j, e) = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(j, e)| (j, *e))
        .expect("nonempty spectrum");
    let amps: Vec<Complex64> = if size == dim {
        (0..dim).map(|k| Complex64::new(vecs[k * size + j], 0.0)).collect()
    } else {
        (0..dim)
            .map(|k| Complex64::new(vecs[k * size + j], vecs[(k + dim) * size + j]))
            .collect()
    };
    Ok((e, StateVector::from_amplitudes_normalized(n, amps)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_z_ground_state() {
        let h = PauliSum::parse("1.0 Z").unwrap();
        let (e, psi) = exact_diagonalize(&h).unwrap();
        assert_eq!(e, -1.0);
        assert_eq!(psi.amplitudes()[1], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn jacobi_on_two_by_two() {
        let mut a = vec![2.0, 1.0, 1.0, 2.0];
        let (mut vals, _) = jacobi_eigen(&mut a, 2).unwrap();
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn complex_hamiltonian_uses_embedding() {
        // Y has eigenvalues ±1 with complex eigenvectors.
        let h = PauliSum::parse("1.0 Y\n0.5 Z").unwrap();
        let (e, psi) = exact_diagonalize(&h).unwrap();
        assert!((e + (1.25f64).sqrt()).abs() < 1e-12);
        let hpsi = h.apply(psi.amplitudes()).unwrap();
        for (a, b) in hpsi.iter().zip(psi.amplitudes()) {
            assert!((a - b * e).norm() < 1e-10);
        }
    }

    #[test]
    fn rejects_oversized_register() {
        let text = format!("1.0 {}\n1.0 X{}", "Z".repeat(13), "I".repeat(12));
        let h = PauliSum::parse(&text).unwrap();
        assert!(exact_diagonalize(&h).is_err());
    }
}
