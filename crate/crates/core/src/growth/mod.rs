//! Growing graph states from probabilistic heralded links.
//!
//! Two strategies are provided. Branch growth attaches Bell pairs to the
//! tip of a chain and loses the tip on failure. Broker growth gives every
//! node an optically active broker qubit that absorbs failed attempts, so
//! the client qubits holding the graph are never disturbed.

mod branch;
mod broker;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use branch::{branch_step, simulate_branch_growth, Branch, BranchEnsemble, BranchGrowthConfig, StepOutcome};
pub use broker::{broker_attempt, broker_bell, broker_to_client_edge, BrokerNode, EdgeCorrection};

use crate::erasure::{DetectorSide, ParityPhase};
use crate::error::{Error, Result};

/// A heralded link abstracted to its success probability and duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkModel {
    pub p_success: f64,
    /// Seconds per attempt.
    pub attempt_time: f64,
}

impl LinkModel {
    pub fn new(p_success: f64, attempt_time: f64) -> Result<Self> {
        let link = LinkModel { p_success, attempt_time };
        link.validate()?;
        Ok(link)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_success > 0.0 && self.p_success <= 1.0) {
            return Err(Error::param("p_success", format!("{} is not in (0, 1]", self.p_success)));
        }
        if !(self.attempt_time > 0.0) {
            return Err(Error::param("attempt_time", format!("{} is not positive", self.attempt_time)));
        }
        Ok(())
    }

    /// Samples whether one attempt succeeds and, if so, which detector
    /// clicked.
    pub fn attempt<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<ParityPhase> {
        if !rng.random_bool(self.p_success) {
            return None;
        }
        let side = if rng.random_bool(0.5) { DetectorSide::Left } else { DetectorSide::Right };
        Some(ParityPhase::for_click(side))
    }
}

/// Expected seconds per created edge, `attempt_time / p_success`.
pub fn edge_time(link: &LinkModel) -> Result<f64> {
    link.validate()?;
    Ok(link.attempt_time / link.p_success)
}

/// One row of a growth trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub step: u64,
    pub attempts: u64,
    pub qubits: u64,
    pub edges: u64,
    pub model_time_ns: f64,
}

/// Counters for one growth run. `model_time` is always
/// `attempts * attempt_time`.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct GrowthStats {
    pub attempts: u64,
    pub successes: u64,
    pub qubits_in_state: u64,
    pub edges_created: u64,
    pub model_time: f64,
    pub trace: Vec<TraceRow>,
}

impl GrowthStats {
    /// The trace as CSV with a header row.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("step,attempts,qubits,edges,model_time_ns\n");
        for r in &self.trace {
            out.push_str(&format!("{},{},{},{},{}\n", r.step, r.attempts, r.qubits, r.edges, r.model_time_ns));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_time_examples() {
        let nv = LinkModel::new(5e-5, 200e-9).unwrap();
        assert!((edge_time(&nv).unwrap() - 4e-3).abs() < 1e-15);
        let qd = LinkModel::new(0.125, 1e-9).unwrap();
        assert_eq!(edge_time(&qd).unwrap(), 8e-9);
        let sure = LinkModel::new(1.0, 3e-9).unwrap();
        assert_eq!(edge_time(&sure).unwrap(), 3e-9);
        assert!(LinkModel::new(0.0, 1.0).is_err());
    }
}
