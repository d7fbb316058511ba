//! One heralded entanglement attempt between two emitters.
//!
//! Each emitter that sits in `|1>` is driven to `|e>` and relaxes back,
//! releasing one photon into its own arm: the emitter on qubit `a` feeds the
//! left arm, the one on `b` the right arm. A beam splitter erases which arm
//! the photon came from and two detectors record clicks. Photon loss and
//! detector dark counts are modelled as classical branchings, so every
//! attempt can be enumerated exactly.

mod engine;

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use engine::{
    heralded_performance, heralded_performance_for, ideal_attempt, ideal_attempt_on, lossy_attempt,
    lossy_attempt_on, enumerate_heralds, ClickRow, Clicks, HeraldOutcome, HeraldRecord, Performance,
};

use crate::error::{Error, Result};
use crate::graph::LocalClifford;
use crate::statevec::gates::{I, ONE};
use crate::statevec::{DensityState, PureState};

/// Beam-splitter action on the creation-operator amplitudes of the two
/// input arms. Reflection carries the phase `i`.
pub fn beamsplitter_map(amp_left: Complex64, amp_right: Complex64) -> (Complex64, Complex64) {
    let h = FRAC_1_SQRT_2;
    ((I * amp_left + amp_right) * h, (amp_left + I * amp_right) * h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorSide {
    Left,
    Right,
}

/// The relative phase `p` in the odd-parity projector
/// `|10><10| + p|01><01|`.
///
/// A single click gives `±i`; the two-round scheme composes two such
/// projections and ends with `±1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParityPhase {
    #[serde(rename = "+1")]
    One,
    #[serde(rename = "-1")]
    MinusOne,
    #[serde(rename = "+i")]
    PlusI,
    #[serde(rename = "-i")]
    MinusI,
}

impl ParityPhase {
    /// Phase heralded by a single click on `side`.
    pub fn for_click(side: DetectorSide) -> Self {
        match side {
            DetectorSide::Left => ParityPhase::MinusI,
            DetectorSide::Right => ParityPhase::PlusI,
        }
    }

    pub fn value(self) -> Complex64 {
        match self {
            ParityPhase::One => ONE,
            ParityPhase::MinusOne => -ONE,
            ParityPhase::PlusI => I,
            ParityPhase::MinusI => -I,
        }
    }

    /// The phase closest to `z`, if `z` is within 1e-9 of a fourth root of
    /// unity.
    pub fn from_value(z: Complex64) -> Option<Self> {
        [ParityPhase::One, ParityPhase::MinusOne, ParityPhase::PlusI, ParityPhase::MinusI]
            .into_iter()
            .find(|p| (p.value() - z).norm() < 1e-9)
    }

    /// `diag(1, p)` as a local Clifford.
    pub fn clifford(self) -> LocalClifford {
        match self {
            ParityPhase::One => LocalClifford::IDENTITY,
            ParityPhase::MinusOne => LocalClifford::pauli(crate::statevec::Pauli::Z),
            ParityPhase::PlusI => LocalClifford::phase_s(),
            ParityPhase::MinusI => LocalClifford::phase_sdg(),
        }
    }
}

/// How an attempt is excited and which click patterns count as success.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scheme {
    /// Full excitation, accept exactly one click.
    IdealSingleClick,
    /// Each emitter starts in `cos θ|0> + ε|1>` with `ε = sin θ`; accept
    /// exactly one click.
    WeakExcitation { epsilon: f64 },
    /// Two rounds with a bit flip of both emitters in between; accept one
    /// click in each round.
    TwoPhoton,
}

impl Scheme {
    pub fn rounds(self) -> usize {
        match self {
            Scheme::TwoPhoton => 2,
            _ => 1,
        }
    }

    /// The two-emitter preparation used for enumeration: `|++>`, or the
    /// weakly excited product state.
    pub fn default_input(self) -> Result<PureState> {
        match self {
            Scheme::WeakExcitation { epsilon } => {
                let one = PureState::single(Complex64::new((1.0 - epsilon * epsilon).sqrt(), 0.0), ONE * epsilon)?;
                one.append(&one)
            }
            _ => PureState::init_plus(2),
        }
    }
}

/// Optical apparatus for one attempt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApparatusParams {
    /// Probability that an emitted photon reaches a detector and is counted.
    pub eta: f64,
    /// Probability of a dark click per detector per attempt window.
    pub dark_prob: f64,
    pub scheme: Scheme,
    /// Detectors resolve photon number; otherwise they only register
    /// click or no click.
    pub number_resolving: bool,
}

impl ApparatusParams {
    /// Lossless, noiseless, number-resolving single-click apparatus.
    pub fn ideal() -> Self {
        ApparatusParams { eta: 1.0, dark_prob: 0.0, scheme: Scheme::IdealSingleClick, number_resolving: true }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !unit(self.eta) {
            return Err(Error::param("eta", format!("{} is not in [0, 1]", self.eta)));
        }
        if !unit(self.dark_prob) {
            return Err(Error::param("dark_prob", format!("{} is not in [0, 1]", self.dark_prob)));
        }
        if let Scheme::WeakExcitation { epsilon } = self.scheme {
            if !(epsilon > 0.0 && epsilon <= 1.0) {
                return Err(Error::param("epsilon", format!("{epsilon} is not in (0, 1]")));
            }
        }
        Ok(())
    }
}

/// Conditional state of the matter qubits after an attempt.
#[derive(Debug, Clone, PartialEq)]
pub enum MatterState {
    Pure(PureState),
    Mixed(DensityState),
}

impl MatterState {
    pub fn fidelity(&self, target: &PureState) -> Result<f64> {
        match self {
            MatterState::Pure(psi) => psi.fidelity(target),
            MatterState::Mixed(rho) => rho.fidelity(target),
        }
    }

    pub fn to_density(&self) -> Result<DensityState> {
        match self {
            MatterState::Pure(psi) => DensityState::from_pure(psi),
            MatterState::Mixed(rho) => Ok(rho.clone()),
        }
    }
}

/// Applies `|10><10| + p|01><01|` to qubits `(a, b)`, where `|10>` means
/// `a = 1, b = 0`. Returns the renormalised state and the squared norm of
/// the projected vector.
pub fn parity_project(state: &PureState, a: usize, b: usize, phase: ParityPhase) -> Result<(PureState, f64)> {
    let n = state.num_qubits();
    for q in [a, b] {
        if q >= n {
            return Err(Error::QubitOutOfRange { index: q, num_qubits: n });
        }
    }
    if a == b {
        return Err(Error::IndexCollision(a));
    }
    let p = phase.value();
    let amps: Vec<Complex64> = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(x, &z)| match ((x >> a) & 1, (x >> b) & 1) {
            (1, 0) => z,
            (0, 1) => z * p,
            _ => Complex64::new(0.0, 0.0),
        })
        .collect();
    let prob: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    if prob < 1e-24 {
        return Err(Error::ZeroNorm);
    }
    Ok((PureState::from_unnormalized(amps)?, prob))
}

/// Per-attempt success probability: `0.5 η²` for the two-photon scheme,
/// `0.5 η` for the single-click schemes.
pub fn success_rate_model(scheme: Scheme, eta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::param("eta", format!("{eta} is not in [0, 1]")));
    }
    Ok(match scheme {
        Scheme::TwoPhoton => 0.5 * eta * eta,
        _ => 0.5 * eta,
    })
}
