use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphRegister, VertexId};

/// Basis of one pattern measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PatternBasis {
    Z,
    Y,
    /// Equatorial basis `(|0> ± e^{iφ}|1>)/√2`; outcome 0 is the `+` state.
    #[serde(rename = "xy")]
    Xy(f64),
}

/// One measurement. For an `xy` basis the angle is negated when the XOR of
/// the outcomes listed in `adapt` is 1. `adapt` has no effect on `Z` and
/// `Y` measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub vertex: VertexId,
    pub basis: PatternBasis,
    #[serde(default)]
    pub adapt: Vec<usize>,
}

/// Final byproduct fix on an output: apply `X` if the XOR of outcomes in
/// `x` is 1, then `Z` if the XOR of outcomes in `z` is 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correction {
    pub vertex: VertexId,
    #[serde(default)]
    pub x: Vec<usize>,
    #[serde(default)]
    pub z: Vec<usize>,
}

/// Graph, measurement order and feed-forward of a computation. Vertices
/// are `0..num_vertices()`; inputs start in caller-supplied states, all
/// others in `|+>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementPattern {
    pub inputs: Vec<VertexId>,
    pub outputs: Vec<VertexId>,
    pub edges: Vec<(VertexId, VertexId)>,
    pub measurements: Vec<Measurement>,
    #[serde(default)]
    pub corrections: Vec<Correction>,
}

/// Byproduct bits `(x, z)` for each output, in output order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct PauliFrame {
    pub bits: Vec<(bool, bool)>,
}

fn parity(outcomes: &[u8], indices: &[usize]) -> bool {
    indices.iter().fold(0, |acc, &i| acc ^ outcomes[i]) == 1
}

impl MeasurementPattern {
    pub fn num_vertices(&self) -> usize {
        let max = self
            .inputs
            .iter()
            .chain(&self.outputs)
            .chain(self.measurements.iter().map(|m| &m.vertex))
            .chain(self.edges.iter().flat_map(|(a, b)| [a, b]))
            .max();
        max.map_or(0, |&v| v as usize + 1)
    }

    /// The graph the pattern runs on.
    pub fn blueprint(&self) -> Result<GraphRegister> {
        GraphRegister::from_edges(self.num_vertices() as u32, &self.edges)
    }

    /// Checks structural invariants: each non-output vertex is measured
    /// exactly once, outputs never, and `adapt` and corrections only look
    /// at earlier measurements.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_vertices();
        let mismatch = |msg: String| Err(Error::PatternMismatch(msg));
        let mut measured = vec![false; n];
        for (k, m) in self.measurements.iter().enumerate() {
            let v = m.vertex as usize;
            if measured[v] {
                return mismatch(format!("vertex {v} measured twice"));
            }
            if self.outputs.contains(&m.vertex) {
                return mismatch(format!("output vertex {v} is measured"));
            }
            if let Some(&bad) = m.adapt.iter().find(|&&i| i >= k) {
                return mismatch(format!("measurement {k} adapts on later measurement {bad}"));
            }
            measured[v] = true;
        }
        for v in 0..n {
            if !measured[v] && !self.outputs.contains(&(v as VertexId)) {
                return mismatch(format!("vertex {v} is neither measured nor an output"));
            }
        }
        for (a, b) in &self.edges {
            if a == b {
                return mismatch(format!("self-loop on {a}"));
            }
        }
        let count = self.measurements.len();
        for c in &self.corrections {
            if !self.outputs.contains(&c.vertex) {
                return mismatch(format!("correction on non-output {}", c.vertex));
            }
            if c.x.iter().chain(&c.z).any(|&i| i >= count) {
                return mismatch(format!("correction on {} refers to a missing measurement", c.vertex));
            }
        }
        Ok(())
    }

    /// Checks that `blueprint` has exactly this pattern's vertices and edges.
    pub fn check_blueprint(&self, blueprint: &GraphRegister) -> Result<()> {
        let expected = self.blueprint()?;
        let same_vertices = blueprint.vertices().eq(expected.vertices());
        if !same_vertices || blueprint.edges() != expected.edges() {
            return Err(Error::PatternMismatch("blueprint graph differs from the pattern's edges".into()));
        }
        Ok(())
    }

    /// Whether measurement `k` has its angle negated, given earlier outcomes.
    pub fn flipped(&self, k: usize, outcomes: &[u8]) -> bool {
        parity(outcomes, &self.measurements[k].adapt)
    }

    /// Byproduct bits on each output for a full outcome record.
    pub fn frame(&self, outcomes: &[u8]) -> PauliFrame {
        let bits = self
            .outputs
            .iter()
            .map(|v| {
                self.corrections
                    .iter()
                    .filter(|c| c.vertex == *v)
                    .fold((false, false), |(x, z), c| (x ^ parity(outcomes, &c.x), z ^ parity(outcomes, &c.z)))
            })
            .collect();
        PauliFrame { bits }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pattern serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: MeasurementPattern =
            serde_json::from_str(text).map_err(|e| Error::param("pattern", e.to_string()))?;
        p.validate()?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_and_basis_format() {
        let p = MeasurementPattern {
            inputs: vec![0],
            outputs: vec![2],
            edges: vec![(0, 1), (1, 2)],
            measurements: vec![
                Measurement { vertex: 0, basis: PatternBasis::Xy(0.5), adapt: vec![] },
                Measurement { vertex: 1, basis: PatternBasis::Y, adapt: vec![0] },
            ],
            corrections: vec![Correction { vertex: 2, x: vec![1], z: vec![0] }],
        };
        let text = p.to_json();
        assert!(text.contains("\"xy\": 0.5") && text.contains("\"Y\""));
        assert_eq!(MeasurementPattern::from_json(&text).unwrap(), p);
        assert_eq!(p.frame(&[1, 0]).bits, vec![(false, true)]);
    }

    #[test]
    fn validation_catches_structure_errors() {
        let mut p = MeasurementPattern {
            inputs: vec![0],
            outputs: vec![1],
            edges: vec![(0, 1)],
            measurements: vec![Measurement { vertex: 0, basis: PatternBasis::Z, adapt: vec![0] }],
            corrections: vec![],
        };
        assert!(p.validate().is_err());
        p.measurements[0].adapt.clear();
        assert!(p.validate().is_ok());
        p.outputs.clear();
        assert!(p.validate().is_err());
    }
}
