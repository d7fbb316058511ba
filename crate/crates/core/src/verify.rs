//! Oracle-equivalence suites: the graph backend, patterns, growth and
//! brokers checked against the dense backend, and the photonic model
//! checked against its closed forms.

use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::Serialize;

use crate::erasure::{self, enumerate_heralds, ApparatusParams, ParityPhase, Scheme};
use crate::error::{Error, Result};
use crate::graph::{GraphBackend, GraphRegister, LocalClifford, VertexId};
use crate::growth::{branch_step, broker_attempt, broker_to_client_edge, Branch, BrokerNode, LinkModel, StepOutcome};
use crate::lu;
use crate::mbqc::{compile_circuit, compile_rotation, rotation_unitary, run_all_branches, run_pattern, CircuitSpec, Execution, Gate, OutcomeSource};
use crate::seed::trial_rng;
use crate::statevec::{reduced_density, KeyedRegister, Pauli, PureState, ACCUMULATED_TOL, EXACT_TOL};

/// A graph register and a dense register driven in lockstep. Graph
/// measurements are sampled; the dense side is forced to the same outcome.
#[derive(Debug, Clone, Default)]
pub struct MirrorBackend {
    graph: GraphRegister,
    dense: KeyedRegister,
}

impl MirrorBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dense(&self) -> &KeyedRegister {
        &self.dense
    }

    /// Fails with [`Error::OracleMismatch`] unless both sides hold the same
    /// state up to global phase.
    pub fn check(&self, tol: f64) -> Result<()> {
        let from_graph = self.graph.to_dense()?;
        let direct = self.dense.state_sorted()?;
        if from_graph.equal_up_to_global_phase(&direct, tol)? {
            Ok(())
        } else {
            Err(Error::OracleMismatch(format!("graph and dense states differ on vertices {:?}", self.dense.keys())))
        }
    }

    /// Applies a `Z` to the dense side only, desynchronising the mirror.
    pub fn inject_fault(&mut self, v: VertexId) -> Result<()> {
        self.dense.apply(v, &Pauli::Z.matrix())
    }
}

impl GraphBackend for MirrorBackend {
    fn graph(&self) -> &GraphRegister {
        &self.graph
    }

    fn new_vertex(&mut self) -> Result<VertexId> {
        let v = self.graph.new_vertex();
        self.dense.add_plus(v)?;
        Ok(v)
    }

    fn add_cz(&mut self, a: VertexId, b: VertexId) -> Result<()> {
        self.graph.add_cz(a, b)?;
        self.dense.cz(a, b)
    }

    fn apply_local_clifford(&mut self, v: VertexId, c: LocalClifford) -> Result<()> {
        self.graph.apply_local_clifford(v, c)?;
        self.dense.apply(v, &c.matrix())
    }

    fn measure_pauli<R: Rng + ?Sized>(&mut self, v: VertexId, axis: Pauli, rng: &mut R) -> Result<u8> {
        let outcome = self.graph.measure_pauli(v, axis, rng)?;
        self.dense.measure_pauli_forced(v, axis, outcome)?;
        Ok(outcome)
    }

    fn parity_project(&mut self, a: VertexId, b: VertexId, phase: ParityPhase) -> Result<f64> {
        let (qa, qb) = (self.dense.position(a)?, self.dense.position(b)?);
        let (post, p_dense) = erasure::parity_project(self.dense.state(), qa, qb, phase)?;
        let p_graph = self.graph.parity_project(a, b, phase)?;
        if (p_graph - p_dense).abs() > ACCUMULATED_TOL {
            return Err(Error::OracleMismatch(format!("parity probability {p_graph} vs dense {p_dense}")));
        }
        *self.dense.state_mut() = post;
        Ok(p_graph)
    }
}

/// One random sequence of local Cliffords, control-phases and Pauli
/// measurements on `num_qubits` qubits, checked after every operation. A
/// measured qubit is replaced by a fresh one so the width stays fixed.
pub fn random_clifford_trial<R: Rng + ?Sized>(num_qubits: usize, ops: usize, rng: &mut R, inject: bool) -> Result<()> {
    if num_qubits < 2 {
        return Err(Error::param("num_qubits", "at least two qubits are needed"));
    }
    let mut m = MirrorBackend::new();
    let mut live: Vec<VertexId> = (0..num_qubits).map(|_| m.new_vertex()).collect::<Result<_>>()?;
    if inject {
        m.inject_fault(live[0])?;
    }
    let cliffords: Vec<LocalClifford> = LocalClifford::all().collect();
    for _ in 0..ops {
        match rng.random_range(0..3) {
            0 => {
                let v = *live.choose(rng).expect("nonempty");
                let c = *cliffords.choose(rng).expect("nonempty");
                m.apply_local_clifford(v, c)?;
            }
            1 => {
                let i = rng.random_range(0..live.len());
                let j = (i + rng.random_range(1..live.len())) % live.len();
                m.add_cz(live[i], live[j])?;
            }
            _ => {
                let i = rng.random_range(0..live.len());
                let axis = *Pauli::ALL.choose(rng).expect("nonempty");
                m.measure_pauli(live[i], axis, rng)?;
                live[i] = m.new_vertex()?;
            }
        }
        m.check(ACCUMULATED_TOL)?;
    }
    Ok(())
}

/// Outcome of one broker-farm run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrokerFarmReport {
    pub failed_attempts: u64,
    pub successes: u64,
    /// Largest change of the clients' reduced state across a failed attempt.
    pub max_client_drift: f64,
    /// Brokered edges whose client state was certified as a graph state.
    pub certified_edges: usize,
}

/// Links a ring of `nodes` broker nodes repeatedly until at least
/// `min_failures` attempts have failed, checking after every failure that
/// the clients' joint reduced state is unchanged and after every transfer
/// that the clients hold the expected graph state up to local Cliffords.
pub fn broker_farm_trial<R: Rng + ?Sized>(
    nodes: usize,
    min_failures: u64,
    link: &LinkModel,
    rng: &mut R,
) -> Result<BrokerFarmReport> {
    if !(2..=4).contains(&nodes) {
        return Err(Error::param("nodes", "the farm check supports 2 to 4 nodes"));
    }
    let mut m = MirrorBackend::new();
    let mut farm: Vec<BrokerNode> = (0..nodes).map(|id| BrokerNode::new(&mut m, id)).collect::<Result<_>>()?;
    let client_state = |m: &MirrorBackend, farm: &[BrokerNode]| -> Result<_> {
        let keep: Vec<usize> = farm.iter().map(|n| m.dense.position(n.client)).collect::<Result<_>>()?;
        reduced_density(m.dense.state(), &keep)
    };
    let mut report = BrokerFarmReport { failed_attempts: 0, successes: 0, max_client_drift: 0.0, certified_edges: 0 };
    let mut expected: Vec<(usize, usize)> = Vec::new();
    let mut pair = 0;
    while report.failed_attempts < min_failures || report.successes == 0 {
        let (i, j) = (pair % nodes, (pair + 1) % nodes);
        let before = client_state(&m, &farm)?;
        let (left, right) = split_pair(&mut farm, i, j);
        if !broker_attempt(left, right, link, &mut m, rng)? {
            report.failed_attempts += 1;
            let drift = client_state(&m, &farm)?.max_abs_diff(&before)?;
            report.max_client_drift = report.max_client_drift.max(drift);
            continue;
        }
        report.successes += 1;
        broker_to_client_edge(left, right, &mut m, rng)?;
        m.check(ACCUMULATED_TOL)?;
        let e = (i.min(j), i.max(j));
        match expected.iter().position(|&x| x == e) {
            Some(k) => {
                expected.remove(k);
            }
            None => expected.push(e),
        }
        if certify_clients(&m, &farm, &expected)? {
            report.certified_edges += 1;
        }
        pair += 1;
    }
    Ok(report)
}

fn split_pair(farm: &mut [BrokerNode], i: usize, j: usize) -> (&mut BrokerNode, &mut BrokerNode) {
    if i < j {
        let (lo, hi) = farm.split_at_mut(j);
        (&mut lo[i], &mut hi[0])
    } else {
        let (lo, hi) = farm.split_at_mut(i);
        (&mut hi[0], &mut lo[j])
    }
}

/// Projects the idle brokers onto `|+>`, which they are in, and checks the
/// clients' pure state against the graph with edges `expected` by
/// exhaustive local-Clifford search.
fn certify_clients(m: &MirrorBackend, farm: &[BrokerNode], expected: &[(usize, usize)]) -> Result<bool> {
    let mut dense = m.dense.clone();
    for node in farm {
        dense.measure_pauli_forced(node.broker, Pauli::X, 0)?;
    }
    let order: Vec<VertexId> = farm.iter().map(|n| n.client).collect();
    let clients = dense.state_in_order(&order)?;
    lu::lc_equivalent_to_graph(&clients, expected)
}

/// Verification suites selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Graph,
    Patterns,
    Growth,
    Brokers,
    Erasure,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Graph, Suite::Patterns, Suite::Growth, Suite::Brokers, Suite::Erasure];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Graph => "graph",
            Suite::Patterns => "patterns",
            Suite::Growth => "growth",
            Suite::Brokers => "brokers",
            Suite::Erasure => "erasure",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::param("suite", format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Random trials per suite.
    pub trials: usize,
    /// Desynchronise the first trial of each suite on purpose.
    pub inject_failure: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: 0, trials: 50, inject_failure: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn run_suites(suites: &[Suite], cfg: &VerifyConfig) -> Vec<SuiteReport> {
    suites.iter().map(|&s| run_suite(s, cfg)).collect()
}

/// Runs one suite; every check error is recorded as a failure.
pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> SuiteReport {
    let mut report = SuiteReport { suite, checks: 0, failures: Vec::new() };
    for trial in 0..cfg.trials.max(1) {
        let inject = cfg.inject_failure && trial == 0;
        let mut rng = trial_rng(cfg.seed ^ (suite as u64) << 56, trial as u64);
        let outcome = match suite {
            Suite::Graph => random_clifford_trial(2 + trial % 11, 40, &mut rng, inject),
            Suite::Patterns => pattern_check(trial, &mut rng, inject),
            Suite::Growth => growth_check(&mut rng, inject),
            Suite::Brokers => broker_check(&mut rng, inject),
            Suite::Erasure => erasure_check(&mut rng, inject),
        };
        report.checks += 1;
        if let Err(e) = outcome {
            report.failures.push(format!("trial {trial}: {e}"));
        }
    }
    report
}

fn mismatch(what: impl Into<String>) -> Error {
    Error::OracleMismatch(what.into())
}

fn random_qubit<R: Rng + ?Sized>(rng: &mut R) -> Result<PureState> {
    let theta: f64 = rng.random_range(0.0..std::f64::consts::PI);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    PureState::single(
        num_complex::Complex64::new((theta / 2.0).cos(), 0.0),
        num_complex::Complex64::from_polar((theta / 2.0).sin(), phi),
    )
}

fn pattern_check<R: Rng + ?Sized>(trial: usize, rng: &mut R, inject: bool) -> Result<()> {
    let mut angle = || rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    if trial.is_multiple_of(2) {
        let angles = [angle(), angle(), angle()];
        let pattern = compile_rotation(angles);
        let input = random_qubit(rng)?;
        let mut target = input.clone();
        target.apply_1q(0, &rotation_unitary(angles))?;
        if inject {
            target.apply_pauli(0, Pauli::X)?;
        }
        for run in run_all_branches(&pattern.blueprint()?, &pattern, &input, Execution::Lazy)? {
            if run.output.fidelity(&target)? < 1.0 - ACCUMULATED_TOL {
                return Err(mismatch(format!("rotation {angles:?} branch {:?}", run.outcomes)));
            }
        }
        return Ok(());
    }
    let (a, b, c, d) = (angle(), angle(), angle(), angle());
    let circuit = CircuitSpec {
        wires: 2,
        gates: vec![
            Gate::Rz { wire: 0, angle: a },
            Gate::H { wire: 0 },
            Gate::Rz { wire: 1, angle: b },
            Gate::Cz { a: 0, b: 1 },
            Gate::H { wire: 1 },
            Gate::Rz { wire: 0, angle: c },
            Gate::Rz { wire: 1, angle: d },
            Gate::H { wire: 0 },
        ],
    };
    let (blueprint, pattern) = compile_circuit(&circuit)?;
    let input = random_qubit(rng)?.append(&random_qubit(rng)?)?;
    let mut target = circuit.simulate(&input)?;
    if inject {
        target.apply_pauli(0, Pauli::Z)?;
    }
    let seed: u64 = rng.random();
    let mut eager_rng = trial_rng(seed, 0);
    let mut lazy_rng = trial_rng(seed, 0);
    let eager = run_pattern(&blueprint, &pattern, &input, Execution::Eager, OutcomeSource::Sampled(&mut eager_rng))?;
    let lazy = run_pattern(&blueprint, &pattern, &input, Execution::Lazy, OutcomeSource::Sampled(&mut lazy_rng))?;
    if eager.outcomes != lazy.outcomes || lazy.peak_qubits >= eager.peak_qubits {
        return Err(mismatch("lazy and eager runs disagree"));
    }
    for run in [eager, lazy] {
        if run.output.fidelity(&target)? < 1.0 - ACCUMULATED_TOL {
            return Err(mismatch(format!("bridge circuit branch {:?}", run.outcomes)));
        }
    }
    Ok(())
}

fn growth_check<R: Rng + ?Sized>(rng: &mut R, inject: bool) -> Result<()> {
    let mut m = MirrorBackend::new();
    let mut branch = Branch::chain(&mut m, 4)?;
    if inject {
        m.inject_fault(branch.vertices()[1])?;
    }
    let link = LinkModel::new(rng.random_range(0.2..0.8), 1e-9)?;
    for _ in 0..30 {
        if branch.is_empty() || branch.len() > 12 {
            break;
        }
        let before = branch.len();
        let grew = branch_step(&mut m, &mut branch, &link, rng)? == StepOutcome::Grew;
        let expected = if grew { before + 2 } else { before - 1 };
        if branch.len() != expected || m.graph.len() != branch.len() {
            return Err(mismatch("branch length bookkeeping"));
        }
        m.check(ACCUMULATED_TOL)?;
    }
    Ok(())
}

fn broker_check<R: Rng + ?Sized>(rng: &mut R, inject: bool) -> Result<()> {
    let link = LinkModel::new(0.25, 1e-9)?;
    let report = broker_farm_trial(4, 20, &link, rng)?;
    let drift = if inject { 1.0 } else { report.max_client_drift };
    if drift > EXACT_TOL {
        return Err(mismatch(format!("client state moved by {drift} on a failed attempt")));
    }
    if report.certified_edges as u64 != report.successes {
        return Err(mismatch("a brokered edge failed certification"));
    }
    Ok(())
}

fn erasure_check<R: Rng + ?Sized>(rng: &mut R, inject: bool) -> Result<()> {
    let eta: f64 = rng.random_range(0.01..1.0);
    let params = ApparatusParams { eta, dark_prob: 0.0, scheme: Scheme::TwoPhoton, number_resolving: false };
    let perf = erasure::heralded_performance(&params)?;
    let expected = if inject { eta * eta } else { 0.5 * eta * eta };
    if (perf.success_prob - expected).abs() > 1e-15 || (perf.fidelity - 1.0).abs() > EXACT_TOL {
        return Err(mismatch(format!("two-photon at eta {eta}: p {} fidelity {}", perf.success_prob, perf.fidelity)));
    }
    let ideal = enumerate_heralds(&PureState::init_plus(2)?, 1, 0, &ApparatusParams::ideal())?;
    for o in ideal.iter().filter(|o| o.accepted) {
        if (o.probability - 0.25).abs() > EXACT_TOL || o.fidelity().unwrap_or(0.0) < 1.0 - EXACT_TOL {
            return Err(mismatch("ideal single-click record"));
        }
    }
    Ok(())
}
