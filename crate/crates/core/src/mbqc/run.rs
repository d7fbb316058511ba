use std::collections::BTreeSet;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::pattern::{MeasurementPattern, PatternBasis, PauliFrame};
use crate::error::{Error, Result};
use crate::graph::{GraphRegister, VertexId};
use crate::statevec::{Basis, KeyedRegister, Pauli, PureState};

/// How the dense simulation allocates qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    /// Prepare the whole graph, then measure.
    Eager,
    /// Create each qubit and its edges only when a measurement needs them.
    #[default]
    Lazy,
}

/// Where measurement outcomes come from.
pub enum OutcomeSource<'a> {
    Sampled(&'a mut dyn RngCore),
    /// Physical outcomes, one per measurement in pattern order.
    Forced(&'a [u8]),
}

/// Result of running a pattern on a dense register.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternRun {
    /// Corrected output state; qubit `k` is output `k`.
    pub output: PureState,
    /// Physical outcomes in measurement order.
    pub outcomes: Vec<u8>,
    /// Probability of this outcome record.
    pub probability: f64,
    pub frame: PauliFrame,
    /// Largest number of qubits alive at once.
    pub peak_qubits: usize,
}

struct Runner<'p> {
    pattern: &'p MeasurementPattern,
    register: KeyedRegister,
    pending: BTreeSet<(VertexId, VertexId)>,
    peak: usize,
}

impl Runner<'_> {
    fn ensure(&mut self, v: VertexId) -> Result<()> {
        if !self.register.contains(v) {
            self.register.add_plus(v)?;
            self.peak = self.peak.max(self.register.len());
        }
        Ok(())
    }

    fn apply_edges_of(&mut self, v: VertexId) -> Result<()> {
        let incident: Vec<_> = self.pending.iter().copied().filter(|&(a, b)| a == v || b == v).collect();
        for (a, b) in incident {
            self.ensure(a)?;
            self.ensure(b)?;
            self.register.cz(a, b)?;
            self.pending.remove(&(a, b));
        }
        Ok(())
    }
}

/// Runs `pattern` with the dense backend.
///
/// `blueprint` must carry exactly the pattern's graph. `input` holds the
/// joint state of the input vertices, qubit `k` being `pattern.inputs[k]`.
pub fn run_pattern(
    blueprint: &GraphRegister,
    pattern: &MeasurementPattern,
    input: &PureState,
    mode: Execution,
    mut source: OutcomeSource<'_>,
) -> Result<PatternRun> {
    pattern.validate()?;
    pattern.check_blueprint(blueprint)?;
    if let OutcomeSource::Forced(forced) = source {
        if forced.len() != pattern.measurements.len() {
            return Err(Error::DimensionMismatch(forced.len(), pattern.measurements.len()));
        }
    }
    let register = KeyedRegister::from_state(pattern.inputs.clone(), input.clone())?;
    let peak = register.len();
    let mut run = Runner { pattern, register, pending: blueprint.edges().into_iter().collect(), peak };
    if mode == Execution::Eager {
        for v in blueprint.vertices() {
            run.ensure(v)?;
        }
        for v in blueprint.vertices() {
            run.apply_edges_of(v)?;
        }
    }
    let mut outcomes = Vec::with_capacity(pattern.measurements.len());
    let mut probability = 1.0;
    for (k, m) in pattern.measurements.iter().enumerate() {
        run.ensure(m.vertex)?;
        run.apply_edges_of(m.vertex)?;
        let basis = match m.basis {
            PatternBasis::Z => Basis::Pauli(Pauli::Z),
            PatternBasis::Y => Basis::Pauli(Pauli::Y),
            PatternBasis::Xy(angle) if run.pattern.flipped(k, &outcomes) => Basis::Equatorial(-angle),
            PatternBasis::Xy(angle) => Basis::Equatorial(angle),
        };
        let (outcome, p) = match &mut source {
            OutcomeSource::Sampled(rng) => run.register.measure(m.vertex, basis, &mut **rng)?,
            OutcomeSource::Forced(forced) => (forced[k], run.register.measure_forced(m.vertex, basis, forced[k])?),
        };
        outcomes.push(outcome);
        probability *= p;
    }
    for &v in &pattern.outputs {
        run.ensure(v)?;
        run.apply_edges_of(v)?;
    }
    let frame = pattern.frame(&outcomes);
    for (&v, &(x, z)) in pattern.outputs.iter().zip(&frame.bits) {
        if x {
            run.register.apply(v, &Pauli::X.matrix())?;
        }
        if z {
            run.register.apply(v, &Pauli::Z.matrix())?;
        }
    }
    let output = run.register.state_in_order(&pattern.outputs)?;
    Ok(PatternRun { output, outcomes, probability, frame, peak_qubits: run.peak })
}

/// Runs every outcome record with nonzero probability. Limited to 16
/// measurements.
pub fn run_all_branches(
    blueprint: &GraphRegister,
    pattern: &MeasurementPattern,
    input: &PureState,
    mode: Execution,
) -> Result<Vec<PatternRun>> {
    let m = pattern.measurements.len();
    if m > 16 {
        return Err(Error::SizeLimit { requested: m, limit: 16 });
    }
    let mut runs = Vec::new();
    for bits in 0u32..1 << m {
        let forced: Vec<u8> = (0..m).map(|k| ((bits >> k) & 1) as u8).collect();
        match run_pattern(blueprint, pattern, input, mode, OutcomeSource::Forced(&forced)) {
            Ok(run) => runs.push(run),
            Err(Error::ZeroProbability { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(runs)
}
