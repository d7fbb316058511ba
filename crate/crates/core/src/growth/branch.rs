use rayon::prelude::*;
use serde::Serialize;

use super::{GrowthStats, LinkModel, TraceRow};
use crate::error::{Error, Result};
use crate::graph::{GraphBackend, GraphRegister, VertexId};
use crate::seed::trial_rng;
use crate::statevec::Pauli;
use rand::Rng;

/// A growing chain; the last vertex is the tip.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Branch {
    vertices: Vec<VertexId>,
}

impl Branch {
    /// Builds a fresh linear chain of `length` vertices in `register`.
    pub fn chain<B: GraphBackend>(register: &mut B, length: usize) -> Result<Self> {
        let mut vertices = Vec::with_capacity(length);
        for _ in 0..length {
            let v = register.new_vertex()?;
            if let Some(&prev) = vertices.last() {
                register.add_cz(prev, v)?;
            }
            vertices.push(v);
        }
        Ok(Branch { vertices })
    }

    pub fn from_vertices(vertices: Vec<VertexId>) -> Self {
        Branch { vertices }
    }

    pub fn tip(&self) -> Option<VertexId> {
        self.vertices.last().copied()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    /// A Bell pair was fused onto the tip; the branch gained two vertices.
    Grew,
    /// The tip was measured out; the branch lost one vertex.
    Shrank,
}

/// One link attempt at the branch tip.
///
/// Success creates a Bell pair `(n1, n2)` and parity-projects the tip with
/// `n1`, leaving `n2` as the new tip. Failure measures the tip in `Z`.
pub fn branch_step<B: GraphBackend, R: Rng + ?Sized>(
    register: &mut B,
    branch: &mut Branch,
    link: &LinkModel,
    rng: &mut R,
) -> Result<StepOutcome> {
    let tip = branch.tip().ok_or(Error::NotBranchTip(VertexId::MAX))?;
    if !register.graph().contains(tip) {
        return Err(Error::NotBranchTip(tip));
    }
    match link.attempt(rng) {
        Some(phase) => {
            let n1 = register.new_vertex()?;
            let n2 = register.new_vertex()?;
            register.add_cz(n1, n2)?;
            register.parity_project(tip, n1, phase)?;
            branch.vertices.extend([n1, n2]);
            Ok(StepOutcome::Grew)
        }
        None => {
            register.measure_pauli(tip, Pauli::Z, rng)?;
            branch.vertices.pop();
            Ok(StepOutcome::Shrank)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchGrowthConfig {
    pub link: LinkModel,
    pub steps: usize,
    pub trials: usize,
    /// Starting chain length; defaults to `steps + 1` so the branch cannot
    /// run out.
    pub initial_length: Option<usize>,
    /// Record a trace row every this many steps.
    pub trace_every: Option<usize>,
}

/// Ensemble statistics of branch growth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchEnsemble {
    pub p_success: f64,
    pub steps: usize,
    pub trials: usize,
    /// Mean change in branch length per step.
    pub mean_drift: f64,
    /// Standard error of `mean_drift` across trials.
    pub std_error: f64,
    /// `3p - 1`.
    pub expected_drift: f64,
    pub stats: Vec<GrowthStats>,
}

fn run_trial(cfg: &BranchGrowthConfig, master_seed: u64, trial: usize) -> Result<(f64, GrowthStats)> {
    let mut rng = trial_rng(master_seed, trial as u64);
    let mut register = GraphRegister::new();
    let initial = cfg.initial_length.unwrap_or(cfg.steps + 1);
    let mut branch = Branch::chain(&mut register, initial)?;
    let mut stats = GrowthStats::default();
    let row = |step: usize, stats: &GrowthStats, register: &GraphRegister| TraceRow {
        step: step as u64,
        attempts: stats.attempts,
        qubits: register.len() as u64,
        edges: register.num_edges() as u64,
        model_time_ns: stats.attempts as f64 * cfg.link.attempt_time * 1e9,
    };
    for step in 0..cfg.steps {
        if branch.is_empty() {
            break;
        }
        if let Some(every) = cfg.trace_every {
            if step % every == 0 {
                stats.trace.push(row(step, &stats, &register));
            }
        }
        stats.attempts += 1;
        if branch_step(&mut register, &mut branch, &cfg.link, &mut rng)? == StepOutcome::Grew {
            stats.successes += 1;
            stats.edges_created += 1;
        }
    }
    if cfg.trace_every.is_some() {
        stats.trace.push(row(cfg.steps, &stats, &register));
    }
    stats.qubits_in_state = register.len() as u64;
    stats.model_time = stats.attempts as f64 * cfg.link.attempt_time;
    let drift = (branch.len() as f64 - initial as f64) / cfg.steps as f64;
    Ok((drift, stats))
}

/// Runs `trials` independent branch-growth trials in parallel. Trial `k`
/// uses [`trial_rng`]`(master_seed, k)`.
pub fn simulate_branch_growth(cfg: &BranchGrowthConfig, master_seed: u64) -> Result<BranchEnsemble> {
    cfg.link.validate()?;
    if cfg.steps == 0 || cfg.trials == 0 {
        return Err(Error::param("steps/trials", "both must be at least 1"));
    }
    let results = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, master_seed, t))
        .collect::<Result<Vec<_>>>()?;
    let n = results.len() as f64;
    let mean = results.iter().map(|(d, _)| d).sum::<f64>() / n;
    let var = if results.len() > 1 {
        results.iter().map(|(d, _)| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(BranchEnsemble {
        p_success: cfg.link.p_success,
        steps: cfg.steps,
        trials: cfg.trials,
        mean_drift: mean,
        std_error: (var / n).sqrt(),
        expected_drift: 3.0 * cfg.link.p_success - 1.0,
        stats: results.into_iter().map(|(_, s)| s).collect(),
    })
}
