use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gates::{self, Mat2, Pauli, I, ONE, ZERO};
use crate::error::{Error, Result};

/// Largest register the dense pure-state backend will allocate.
pub const MAX_PURE_QUBITS: usize = 20;

/// Tolerance for exact algebraic identities.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for checks that accumulate floating-point error.
pub const ACCUMULATED_TOL: f64 = 1e-10;

/// A normalised pure state over `num_qubits` qubits.
///
/// Qubit 0 is the least significant bit of the basis index. When reading a
/// ket label such as `|AB>` left to right, the leftmost label is the most
/// significant qubit; [`PureState::from_labels`] follows that convention.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

/// Basis for a single-qubit projective measurement.
///
/// Outcome 0 is always the first listed eigenvector: `|0>` for `Z`, `|+>` for
/// `X`, `|+i>` for `Y`, and `(|0> + e^{i phi}|1>)/sqrt 2` for `Equatorial(phi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Basis {
    Pauli(Pauli),
    Equatorial(f64),
}

impl Basis {
    /// The two basis kets, outcome 0 first.
    pub fn vectors(self) -> [[Complex64; 2]; 2] {
        let h = FRAC_1_SQRT_2;
        match self {
            Basis::Pauli(Pauli::Z) => [[ONE, ZERO], [ZERO, ONE]],
            Basis::Pauli(Pauli::X) => Basis::Equatorial(0.0).vectors(),
            Basis::Pauli(Pauli::Y) => [[ONE * h, I * h], [ONE * h, -I * h]],
            Basis::Equatorial(phi) => {
                let e = Complex64::from_polar(h, phi);
                [[ONE * h, e], [ONE * h, -e]]
            }
        }
    }
}

impl From<Pauli> for Basis {
    fn from(p: Pauli) -> Self {
        Basis::Pauli(p)
    }
}

/// Result of measuring one qubit. The measured qubit is no longer part of
/// `post_state`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub outcome: u8,
    pub probability: f64,
    pub post_state: PureState,
}

#[derive(Serialize, Deserialize)]
struct StateDump {
    num_qubits: usize,
    amplitudes: Vec<[f64; 2]>,
}

impl PureState {
    /// `|0...0>` on `n` qubits. `n = 0` gives the scalar state `[1]`.
    pub fn zero(n: usize) -> Result<Self> {
        check_size(n)?;
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        Ok(PureState { num_qubits: n, amps })
    }

    /// `|+>^n`: every amplitude equals `2^{-n/2}`.
    pub fn init_plus(n: usize) -> Result<Self> {
        check_size(n)?;
        let a = Complex64::new((0.5f64).powf(n as f64 / 2.0), 0.0);
        Ok(PureState { num_qubits: n, amps: vec![a; 1 << n] })
    }

    pub fn basis_state(n: usize, index: usize) -> Result<Self> {
        check_size(n)?;
        if index >= 1 << n {
            return Err(Error::QubitOutOfRange { index, num_qubits: n });
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = ONE;
        Ok(PureState { num_qubits: n, amps })
    }

    /// `alpha|0> + beta|1>`, renormalised.
    pub fn single(alpha: Complex64, beta: Complex64) -> Result<Self> {
        Self::from_unnormalized(vec![alpha, beta])
    }

    /// Wraps an already-normalised amplitude vector.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let n = qubits_for_len(amps.len())?;
        let norm = norm_sqr(&amps);
        if (norm - 1.0).abs() > ACCUMULATED_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(PureState { num_qubits: n, amps })
    }

    /// Normalises `amps`; fails on the zero vector.
    pub fn from_unnormalized(mut amps: Vec<Complex64>) -> Result<Self> {
        let n = qubits_for_len(amps.len())?;
        let norm = norm_sqr(&amps);
        if norm < 1e-300 {
            return Err(Error::NotNormalized(norm));
        }
        let s = 1.0 / norm.sqrt();
        amps.iter_mut().for_each(|a| *a *= s);
        Ok(PureState { num_qubits: n, amps })
    }

    /// Builds a state from ket labels, e.g. `[("01", 1), ("10", i)]` for
    /// `|01> + i|10>`. The leftmost character is the most significant qubit.
    /// The result is renormalised.
    pub fn from_labels(terms: &[(&str, Complex64)]) -> Result<Self> {
        let n = terms.first().map(|(l, _)| l.len()).unwrap_or(0);
        check_size(n)?;
        let mut amps = vec![ZERO; 1 << n];
        for (label, c) in terms {
            if label.len() != n {
                return Err(Error::DimensionMismatch(label.len(), n));
            }
            let idx = usize::from_str_radix(label, 2)
                .map_err(|_| Error::param("label", format!("`{label}` is not a bit string")))?;
            amps[idx] += *c;
        }
        Self::from_unnormalized(amps)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(Error::QubitOutOfRange { index: q, num_qubits: self.num_qubits });
        }
        Ok(())
    }

    /// Applies a single-qubit unitary to qubit `q`.
    pub fn apply_1q(&mut self, q: usize, u: &Mat2) -> Result<()> {
        self.check_qubit(q)?;
        let defect = gates::unitarity_defect(u);
        if defect > ACCUMULATED_TOL {
            return Err(Error::NotUnitary(defect));
        }
        self.apply_1q_unchecked(q, u);
        Ok(())
    }

    /// As [`apply_1q`](Self::apply_1q) without validating `u`; also used for
    /// non-unitary single-qubit Kraus factors.
    pub(crate) fn apply_1q_unchecked(&mut self, q: usize, u: &Mat2) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a, b) = gates::apply_to_pair(u, self.amps[i], self.amps[i | bit]);
                self.amps[i] = a;
                self.amps[i | bit] = b;
            }
        }
    }

    /// Control-phase between qubits `a` and `b`: negates every amplitude
    /// whose basis index has both bits set.
    pub fn apply_cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(Error::IndexCollision(a));
        }
        let mask = (1usize << a) | (1usize << b);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
        Ok(())
    }

    /// Applies a Pauli operator to qubit `q`.
    pub fn apply_pauli(&mut self, q: usize, p: Pauli) -> Result<()> {
        self.check_qubit(q)?;
        self.apply_1q_unchecked(q, &p.matrix());
        Ok(())
    }

    /// Born probabilities of the two outcomes of measuring `q` in `basis`.
    pub fn outcome_probabilities(&self, q: usize, basis: Basis) -> Result<[f64; 2]> {
        self.check_qubit(q)?;
        let [e0, e1] = basis.vectors();
        let bit = 1usize << q;
        let mut p = [0.0; 2];
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (lo, hi) = (self.amps[i], self.amps[i | bit]);
                p[0] += (e0[0].conj() * lo + e0[1].conj() * hi).norm_sqr();
                p[1] += (e1[0].conj() * lo + e1[1].conj() * hi).norm_sqr();
            }
        }
        Ok(p)
    }

    /// Measures qubit `q`, sampling the outcome from the Born rule. The
    /// measured qubit is removed; higher qubits shift down by one.
    pub fn measure<R: Rng + ?Sized>(&self, q: usize, basis: Basis, rng: &mut R) -> Result<MeasurementOutcome> {
        let p = self.outcome_probabilities(q, basis)?;
        let u: f64 = rng.random();
        let outcome = if u < p[0] / (p[0] + p[1]) { 0 } else { 1 };
        self.project_out(q, basis, outcome)
    }

    /// Post-selects outcome `outcome` of measuring `q` in `basis`. Fails if
    /// that branch has zero probability.
    pub fn measure_forced(&self, q: usize, basis: Basis, outcome: u8) -> Result<MeasurementOutcome> {
        self.check_qubit(q)?;
        self.project_out(q, basis, outcome)
    }

    fn project_out(&self, q: usize, basis: Basis, outcome: u8) -> Result<MeasurementOutcome> {
        let e = basis.vectors()[(outcome & 1) as usize];
        let (c0, c1) = (e[0].conj(), e[1].conj());
        let low_mask = (1usize << q) - 1;
        let mut out = vec![ZERO; self.amps.len() / 2];
        for (j, slot) in out.iter_mut().enumerate() {
            let lo = (j & low_mask) | ((j & !low_mask) << 1);
            *slot = c0 * self.amps[lo] + c1 * self.amps[lo | (1 << q)];
        }
        let probability = norm_sqr(&out);
        if probability < 1e-24 {
            return Err(Error::ZeroProbability { outcome });
        }
        let s = 1.0 / probability.sqrt();
        out.iter_mut().for_each(|a| *a *= s);
        Ok(MeasurementOutcome {
            outcome,
            probability,
            post_state: PureState { num_qubits: self.num_qubits - 1, amps: out },
        })
    }

    /// `self ⊗ other` with `other`'s qubits placed above this state's qubits
    /// (other's qubit `k` becomes qubit `self.num_qubits + k`).
    pub fn append(&self, other: &PureState) -> Result<PureState> {
        let n = self.num_qubits + other.num_qubits;
        check_size(n)?;
        let mut amps = Vec::with_capacity(1 << n);
        for hi in &other.amps {
            for lo in &self.amps {
                amps.push(lo * hi);
            }
        }
        Ok(PureState { num_qubits: n, amps })
    }

    /// Product state of single-qubit states; `states[k]` becomes qubit `k`.
    pub fn product(states: &[PureState]) -> Result<PureState> {
        let mut acc = PureState::zero(0)?;
        for s in states {
            acc = acc.append(s)?;
        }
        Ok(acc)
    }

    /// Reorders qubits: qubit `k` of the result is qubit `order[k]` of `self`.
    pub fn permute(&self, order: &[usize]) -> Result<PureState> {
        if order.len() != self.num_qubits {
            return Err(Error::DimensionMismatch(order.len(), self.num_qubits));
        }
        let mut seen = vec![false; self.num_qubits];
        for &q in order {
            self.check_qubit(q)?;
            if std::mem::replace(&mut seen[q], true) {
                return Err(Error::IndexCollision(q));
            }
        }
        let mut amps = vec![ZERO; self.amps.len()];
        for (i, slot) in amps.iter_mut().enumerate() {
            let mut src = 0usize;
            for (k, &q) in order.iter().enumerate() {
                src |= ((i >> k) & 1) << q;
            }
            *slot = self.amps[src];
        }
        Ok(PureState { num_qubits: self.num_qubits, amps })
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch(self.num_qubits, other.num_qubits));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// True iff `self = c * other` for some unit-modulus `c`, entrywise
    /// within `tol`.
    pub fn equal_up_to_global_phase(&self, other: &PureState, tol: f64) -> Result<bool> {
        let overlap = other.inner(self)?;
        if overlap.norm() < tol {
            return Ok(false);
        }
        let c = overlap / overlap.norm();
        Ok(self.amps.iter().zip(&other.amps).all(|(a, b)| (a - c * b).norm() <= tol))
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Serialises as `{"num_qubits": n, "amplitudes": [[re, im], ...]}`.
    pub fn to_json(&self) -> String {
        let dump = StateDump {
            num_qubits: self.num_qubits,
            amplitudes: self.amps.iter().map(|a| [a.re, a.im]).collect(),
        };
        serde_json::to_string(&dump).expect("state dump is always serialisable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dump: StateDump =
            serde_json::from_str(text).map_err(|e| Error::param("state dump", e.to_string()))?;
        let amps: Vec<Complex64> = dump.amplitudes.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        let state = Self::from_amplitudes(amps)?;
        if state.num_qubits != dump.num_qubits {
            return Err(Error::DimensionMismatch(dump.num_qubits, state.num_qubits));
        }
        Ok(state)
    }
}

fn check_size(n: usize) -> Result<()> {
    if n > MAX_PURE_QUBITS {
        return Err(Error::SizeLimit { requested: n, limit: MAX_PURE_QUBITS });
    }
    Ok(())
}

fn qubits_for_len(len: usize) -> Result<usize> {
    if !len.is_power_of_two() {
        return Err(Error::BadLength(len));
    }
    let n = len.trailing_zeros() as usize;
    check_size(n)?;
    Ok(n)
}

pub(crate) fn norm_sqr(amps: &[Complex64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::gates::{hadamard, identity, pauli_z};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_amps(s: &PureState, expected: &[Complex64]) {
        assert_eq!(s.amplitudes().len(), expected.len());
        for (a, e) in s.amplitudes().iter().zip(expected) {
            assert!((a - e).norm() < EXACT_TOL, "{a} vs {e}");
        }
    }

    #[test]
    fn init_plus_small_registers() {
        let h = FRAC_1_SQRT_2;
        assert_amps(&PureState::init_plus(1).unwrap(), &[c(h, 0.0), c(h, 0.0)]);
        assert_amps(&PureState::init_plus(2).unwrap(), &[c(0.5, 0.0); 4]);
        assert!(matches!(PureState::init_plus(21), Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn two_qubit_graph_state() {
        let mut s = PureState::init_plus(2).unwrap();
        s.apply_cz(0, 1).unwrap();
        assert_amps(&s, &[c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(-0.5, 0.0)]);
        s.apply_cz(1, 0).unwrap();
        assert_amps(&s, &[c(0.5, 0.0); 4]);
        assert_eq!(s.apply_cz(1, 1), Err(Error::IndexCollision(1)));
        assert!(matches!(s.apply_cz(0, 2), Err(Error::QubitOutOfRange { .. })));
    }

    #[test]
    fn general_qubit_joined_to_plus() {
        // |psi> on the left (most significant), |+> on the right.
        let (alpha, beta) = (c(0.6, 0.0), c(0.0, 0.8));
        let psi = PureState::single(alpha, beta).unwrap();
        let mut s = PureState::init_plus(1).unwrap().append(&psi).unwrap();
        s.apply_cz(0, 1).unwrap();
        let h = FRAC_1_SQRT_2;
        let expected = PureState::from_labels(&[("00", alpha), ("01", alpha), ("10", beta), ("11", -beta)]).unwrap();
        assert!(s.equal_up_to_global_phase(&expected, EXACT_TOL).unwrap());
        assert!((s.amplitude(0b10) - beta * h).norm() < EXACT_TOL);
    }

    #[test]
    fn apply_1q_examples() {
        let mut s = PureState::from_labels(&[("00", ONE), ("01", ONE)]).unwrap();
        let before = s.clone();
        s.apply_1q(1, &identity()).unwrap();
        assert_eq!(s, before);

        let mut zero = PureState::zero(1).unwrap();
        zero.apply_1q(0, &hadamard()).unwrap();
        assert_amps(&zero, &[c(FRAC_1_SQRT_2, 0.0); 2]);

        // sigma_z on the right-hand qubit of (|00> + |01>)/sqrt 2.
        s.apply_1q(0, &pauli_z()).unwrap();
        let expected = PureState::from_labels(&[("00", ONE), ("01", -ONE)]).unwrap();
        assert!(s.equal_up_to_global_phase(&expected, EXACT_TOL).unwrap());

        let shear = [[ONE, ONE], [ZERO, ONE]];
        assert!(matches!(s.apply_1q(0, &shear), Err(Error::NotUnitary(_))));
        assert!(matches!(s.apply_1q(2, &identity()), Err(Error::QubitOutOfRange { .. })));
    }

    #[test]
    fn x_measurement_hops_the_left_qubit() {
        // alpha = 1, beta = 0 joined to |+>; measure the left qubit in x.
        let psi = PureState::zero(1).unwrap();
        let mut s = PureState::init_plus(1).unwrap().append(&psi).unwrap();
        s.apply_cz(0, 1).unwrap();
        let plus = s.measure_forced(1, Basis::Pauli(Pauli::X), 0).unwrap();
        assert!((plus.probability - 0.5).abs() < EXACT_TOL);
        assert_amps(&plus.post_state, &[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]);
        // Outcome |->: ((alpha - beta)|0> + (alpha + beta)|1>)/sqrt 2 with alpha = 1, beta = 0.
        let minus = s.measure_forced(1, Basis::Pauli(Pauli::X), 1).unwrap();
        assert_amps(&minus.post_state, &[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]);
    }

    #[test]
    fn hop_formulas_for_general_input() {
        let (alpha, beta) = (c(0.28, 0.1), c(-0.3, 0.9));
        let psi = PureState::single(alpha, beta).unwrap();
        let (alpha, beta) = (psi.amplitude(0), psi.amplitude(1));
        let mut s = PureState::init_plus(1).unwrap().append(&psi).unwrap();
        s.apply_cz(0, 1).unwrap();
        let h = FRAC_1_SQRT_2;
        let plus = s.measure_forced(1, Basis::Pauli(Pauli::X), 0).unwrap().post_state;
        let minus = s.measure_forced(1, Basis::Pauli(Pauli::X), 1).unwrap().post_state;
        let want_plus = PureState::from_amplitudes(vec![(alpha + beta) * h, (alpha - beta) * h]).unwrap();
        let want_minus = PureState::from_amplitudes(vec![(alpha - beta) * h, (alpha + beta) * h]).unwrap();
        assert!(plus.equal_up_to_global_phase(&want_plus, EXACT_TOL).unwrap());
        assert!(minus.equal_up_to_global_phase(&want_minus, EXACT_TOL).unwrap());
    }

    #[test]
    fn z_measurement_of_eigenstate_is_certain() {
        let s = PureState::zero(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for q in 0..2 {
            let m = s.measure(q, Basis::Pauli(Pauli::Z), &mut rng).unwrap();
            assert_eq!(m.outcome, 0);
            assert!((m.probability - 1.0).abs() < EXACT_TOL);
            assert_amps(&m.post_state, &[ONE, ZERO]);
            assert_eq!(
                s.measure_forced(q, Basis::Pauli(Pauli::Z), 1),
                Err(Error::ZeroProbability { outcome: 1 })
            );
        }
    }

    #[test]
    fn global_phase_comparison() {
        let plus = PureState::init_plus(1).unwrap();
        let rotated = PureState::from_amplitudes(
            plus.amplitudes().iter().map(|a| a * Complex64::from_polar(1.0, std::f64::consts::PI / 7.0)).collect(),
        )
        .unwrap();
        assert!(plus.equal_up_to_global_phase(&rotated, 1e-12).unwrap());
        let zero = PureState::zero(1).unwrap();
        let one = PureState::basis_state(1, 1).unwrap();
        assert!(!zero.equal_up_to_global_phase(&one, 1e-12).unwrap());

        let a = PureState::from_labels(&[("01", ONE), ("10", I)]).unwrap();
        let b = PureState::from_labels(&[("01", I), ("10", ONE)]).unwrap();
        // <a|b> = (1 * i + (-i) * 1)/2 = 0: orthogonal.
        assert!(a.inner(&b).unwrap().norm() < EXACT_TOL);
        assert!(!a.equal_up_to_global_phase(&b, 1e-9).unwrap());
        assert!(matches!(a.inner(&plus), Err(Error::DimensionMismatch(2, 1))));
    }

    #[test]
    fn permute_and_json_round_trip() {
        let s = PureState::from_labels(&[("001", ONE), ("110", I)]).unwrap();
        let p = s.permute(&[2, 0, 1]).unwrap();
        // old qubit 2 -> new 0, old 0 -> new 1, old 1 -> new 2
        let expected = PureState::from_labels(&[("010", ONE), ("101", I)]).unwrap();
        assert!(p.equal_up_to_global_phase(&expected, EXACT_TOL).unwrap());
        let back = PureState::from_json(&s.to_json()).unwrap();
        assert!(back.equal_up_to_global_phase(&s, 1e-15).unwrap());
    }
}
