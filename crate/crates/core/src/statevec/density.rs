use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::{PureState, ACCUMULATED_TOL, EXACT_TOL};
use crate::error::{Error, Result};

/// Largest register the density-matrix backend will allocate.
pub const MAX_DENSITY_QUBITS: usize = 10;

/// A mixed state over `num_qubits` qubits, stored as a dense Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    num_qubits: usize,
    matrix: DMatrix<Complex64>,
}

impl DensityState {
    /// `|psi><psi|`.
    pub fn from_pure(psi: &PureState) -> Result<Self> {
        check_size(psi.num_qubits())?;
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        Ok(DensityState { num_qubits: psi.num_qubits(), matrix: &v * v.adjoint() })
    }

    /// The maximally mixed state `I / 2^n`.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_size(n)?;
        let d = 1usize << n;
        let matrix = DMatrix::from_diagonal_element(d, d, Complex64::new(1.0 / d as f64, 0.0));
        Ok(DensityState { num_qubits: n, matrix })
    }

    /// Convex mixture `sum_k p_k rho_k`. Weights must be non-negative and sum
    /// to one within 1e-12.
    pub fn mix(parts: &[(f64, DensityState)]) -> Result<Self> {
        let Some((_, first)) = parts.first() else {
            return Err(Error::BadMixture(0.0));
        };
        let total: f64 = parts.iter().map(|(p, _)| p).sum();
        if parts.iter().any(|(p, _)| *p < 0.0) || (total - 1.0).abs() > EXACT_TOL {
            return Err(Error::BadMixture(total));
        }
        let mut matrix = DMatrix::zeros(first.matrix.nrows(), first.matrix.ncols());
        for (p, rho) in parts {
            if rho.num_qubits != first.num_qubits {
                return Err(Error::DimensionMismatch(rho.num_qubits, first.num_qubits));
            }
            matrix += &rho.matrix * Complex64::new(*p, 0.0);
        }
        Ok(DensityState { num_qubits: first.num_qubits, matrix })
    }

    /// Accumulates `sum_k w_k |v_k><v_k|` from unnormalised vectors and
    /// returns it with its trace, without normalising.
    pub(crate) fn accumulate<'a>(
        num_qubits: usize,
        terms: impl IntoIterator<Item = (f64, &'a [Complex64])>,
    ) -> Result<(DMatrix<Complex64>, f64)> {
        check_size(num_qubits)?;
        let d = 1usize << num_qubits;
        let mut m = DMatrix::zeros(d, d);
        for (w, v) in terms {
            let col = nalgebra::DVector::from_column_slice(v);
            m += (&col * col.adjoint()) * Complex64::new(w, 0.0);
        }
        let trace = m.trace().re;
        Ok((m, trace))
    }

    /// Normalises an accumulated matrix to unit trace.
    pub(crate) fn from_unnormalized(num_qubits: usize, m: DMatrix<Complex64>) -> Result<Self> {
        let trace = m.trace().re;
        if trace < 1e-300 {
            return Err(Error::NotNormalized(trace));
        }
        Ok(DensityState { num_qubits, matrix: m / Complex64::new(trace, 0.0) })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// `<psi| rho |psi>`.
    pub fn fidelity(&self, psi: &PureState) -> Result<f64> {
        if psi.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch(psi.num_qubits(), self.num_qubits));
        }
        let norm = psi.norm_sqr();
        if (norm - 1.0).abs() > ACCUMULATED_TOL {
            return Err(Error::NotNormalized(norm));
        }
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        Ok((v.adjoint() * &self.matrix * &v)[(0, 0)].re)
    }

    /// Largest entrywise distance between two density matrices.
    pub fn max_abs_diff(&self, other: &DensityState) -> Result<f64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch(self.num_qubits, other.num_qubits));
        }
        Ok((&self.matrix - &other.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// Checks the density-matrix invariants: Hermitian and unit trace within
    /// 1e-12, no eigenvalue below -1e-10.
    pub fn validate(&self) -> Result<()> {
        let herm = (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > EXACT_TOL {
            return Err(Error::param("density matrix", format!("not Hermitian (defect {herm:e})")));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > EXACT_TOL {
            return Err(Error::NotNormalized(tr));
        }
        if let Some(min) = self.eigenvalues().into_iter().reduce(f64::min) {
            if min < -ACCUMULATED_TOL {
                return Err(Error::param("density matrix", format!("negative eigenvalue {min:e}")));
            }
        }
        Ok(())
    }

    /// Transposes the listed qubits' indices.
    pub fn partial_transpose(&self, qubits: &[usize]) -> Result<DMatrix<Complex64>> {
        let mut mask = 0usize;
        for &q in qubits {
            if q >= self.num_qubits {
                return Err(Error::QubitOutOfRange { index: q, num_qubits: self.num_qubits });
            }
            mask |= 1 << q;
        }
        let d = self.matrix.nrows();
        Ok(DMatrix::from_fn(d, d, |r, c| {
            // Swap the masked bits between row and column index.
            let r2 = (r & !mask) | (c & mask);
            let c2 = (c & !mask) | (r & mask);
            self.matrix[(r2, c2)]
        }))
    }

    /// Peres criterion: the smallest eigenvalue of the partial transpose over
    /// `qubits`. Negative means entangled across that cut.
    pub fn min_partial_transpose_eigenvalue(&self, qubits: &[usize]) -> Result<f64> {
        let pt = self.partial_transpose(qubits)?;
        Ok(hermitian_eigenvalues(&pt).into_iter().fold(f64::INFINITY, f64::min))
    }

    /// True when the partial transpose over `qubits` has no eigenvalue below
    /// -1e-10.
    pub fn is_ppt(&self, qubits: &[usize]) -> Result<bool> {
        Ok(self.min_partial_transpose_eigenvalue(qubits)? >= -ACCUMULATED_TOL)
    }

    /// Traces out every qubit not in `keep`; `keep[k]` becomes qubit `k`.
    pub fn reduce(&self, keep: &[usize]) -> Result<DensityState> {
        let keep_mask = mask_of(keep, self.num_qubits)?;
        let traced: Vec<usize> = (0..self.num_qubits).filter(|q| keep_mask & (1 << q) == 0).collect();
        let dk = 1usize << keep.len();
        let mut out = DMatrix::zeros(dk, dk);
        for env in 0..(1usize << traced.len()) {
            let base = scatter(env, &traced);
            for r in 0..dk {
                let rf = base | scatter(r, keep);
                for c in 0..dk {
                    out[(r, c)] += self.matrix[(rf, base | scatter(c, keep))];
                }
            }
        }
        Ok(DensityState { num_qubits: keep.len(), matrix: out })
    }
}

/// Reduced density matrix of a pure state on the qubits in `keep`
/// (`keep[k]` becomes qubit `k`). Works for pure states larger than the
/// density backend limit as long as `keep` is within it.
pub fn reduced_density(psi: &PureState, keep: &[usize]) -> Result<DensityState> {
    check_size(keep.len())?;
    let keep_mask = mask_of(keep, psi.num_qubits())?;
    let traced: Vec<usize> = (0..psi.num_qubits()).filter(|q| keep_mask & (1 << q) == 0).collect();
    let dk = 1usize << keep.len();
    let amps = psi.amplitudes();
    let mut out = DMatrix::zeros(dk, dk);
    let mut column = vec![Complex64::new(0.0, 0.0); dk];
    for env in 0..(1usize << traced.len()) {
        let base = scatter(env, &traced);
        for (k, slot) in column.iter_mut().enumerate() {
            *slot = amps[base | scatter(k, keep)];
        }
        for r in 0..dk {
            for c in 0..dk {
                out[(r, c)] += column[r] * column[c].conj();
            }
        }
    }
    Ok(DensityState { num_qubits: keep.len(), matrix: out })
}

fn mask_of(qubits: &[usize], n: usize) -> Result<usize> {
    let mut mask = 0usize;
    for &q in qubits {
        if q >= n {
            return Err(Error::QubitOutOfRange { index: q, num_qubits: n });
        }
        if mask & (1 << q) != 0 {
            return Err(Error::IndexCollision(q));
        }
        mask |= 1 << q;
    }
    Ok(mask)
}

/// Places bit `k` of `value` at position `positions[k]`.
fn scatter(value: usize, positions: &[usize]) -> usize {
    positions.iter().enumerate().fold(0, |acc, (k, &q)| acc | (((value >> k) & 1) << q))
}

fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    // Symmetrise first so tiny anti-Hermitian round-off cannot upset the solver.
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().copied().collect()
}

fn check_size(n: usize) -> Result<()> {
    if n > MAX_DENSITY_QUBITS {
        return Err(Error::SizeLimit { requested: n, limit: MAX_DENSITY_QUBITS });
    }
    Ok(())
}
