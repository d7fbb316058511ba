//! Single-qubit matrices and Pauli axes.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Row-major 2x2 complex matrix.
pub type Mat2 = [[Complex64; 2]; 2];

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// One of the three Pauli axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> Mat2 {
        match self {
            Pauli::X => pauli_x(),
            Pauli::Y => pauli_y(),
            Pauli::Z => pauli_z(),
        }
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }
}

pub fn identity() -> Mat2 {
    [[ONE, ZERO], [ZERO, ONE]]
}

pub fn hadamard() -> Mat2 {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

pub fn pauli_x() -> Mat2 {
    [[ZERO, ONE], [ONE, ZERO]]
}

pub fn pauli_y() -> Mat2 {
    [[ZERO, -I], [I, ZERO]]
}

pub fn pauli_z() -> Mat2 {
    [[ONE, ZERO], [ZERO, -ONE]]
}

/// `diag(1, e^{i phi})`, the z rotation picked up by a qubit hopping along a
/// wire (equal to `Rz(phi)` up to global phase).
pub fn phase(phi: f64) -> Mat2 {
    [[ONE, ZERO], [ZERO, Complex64::from_polar(1.0, phi)]]
}

/// `diag(1, d)` for an arbitrary unit-modulus `d`.
pub fn diag(d: Complex64) -> Mat2 {
    [[ONE, ZERO], [ZERO, d]]
}

/// `H diag(1, e^{i phi}) H`, the x-axis counterpart of [`phase`].
pub fn x_phase(phi: f64) -> Mat2 {
    matmul(&matmul(&hadamard(), &phase(phi)), &hadamard())
}

pub fn matmul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

pub fn adjoint(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

pub fn scale(a: &Mat2, s: Complex64) -> Mat2 {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

/// Largest entrywise deviation of `U^dagger U` from the identity.
pub fn unitarity_defect(u: &Mat2) -> f64 {
    let p = matmul(&adjoint(u), u);
    let id = identity();
    let mut worst = 0.0f64;
    for r in 0..2 {
        for c in 0..2 {
            worst = worst.max((p[r][c] - id[r][c]).norm());
        }
    }
    worst
}

/// Applies `u` to the column vector `(a, b)`.
pub fn apply_to_pair(u: &Mat2, a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    (u[0][0] * a + u[0][1] * b, u[1][0] * a + u[1][1] * b)
}

/// True when `a = c b` for some unit-modulus `c`, entrywise within `tol`.
pub fn equal_up_to_phase(a: &Mat2, b: &Mat2, tol: f64) -> bool {
    let mut overlap = ZERO;
    for r in 0..2 {
        for c in 0..2 {
            overlap += b[r][c].conj() * a[r][c];
        }
    }
    if overlap.norm() < 1e-12 {
        return false;
    }
    let c = overlap / overlap.norm();
    (0..2).all(|r| (0..2).all(|k| (a[r][k] - c * b[r][k]).norm() <= tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_gates_are_unitary() {
        for m in [identity(), hadamard(), pauli_x(), pauli_y(), pauli_z(), phase(0.3), x_phase(1.1)] {
            assert!(unitarity_defect(&m) < 1e-14);
        }
        let bad = [[ONE, ONE], [ZERO, ONE]];
        assert!(unitarity_defect(&bad) > 0.5);
    }

    #[test]
    fn y_is_i_x_z() {
        let ixz = scale(&matmul(&pauli_x(), &pauli_z()), I);
        assert!(equal_up_to_phase(&ixz, &pauli_y(), 1e-15));
        assert_eq!(ixz, pauli_y());
    }
}
