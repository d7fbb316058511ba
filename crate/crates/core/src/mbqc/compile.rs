use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::pattern::{Correction, Measurement, MeasurementPattern, PatternBasis};
use crate::error::{Error, Result};
use crate::graph::{GraphRegister, VertexId};
use crate::statevec::gates::{self, Mat2};
use crate::statevec::PureState;

/// Below this magnitude an Euler component is treated as absent.
const DEGENERATE: f64 = 1e-12;

/// A gate of the circuit model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "lowercase")]
pub enum Gate {
    /// `diag(1, e^{i angle})`, a z rotation up to global phase.
    Rz { wire: usize, angle: f64 },
    H { wire: usize },
    Cz { a: usize, b: usize },
}

/// A circuit on `wires` qubits. Wire `k` is qubit `k` of input and output
/// states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub wires: usize,
    pub gates: Vec<Gate>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CircuitFile {
    Full(CircuitSpec),
    Gates(Vec<Gate>),
}

impl CircuitSpec {
    /// Parses `{"wires": n, "gates": [...]}` or a bare gate list, in which
    /// case the wire count is one more than the highest wire used.
    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: CircuitFile = serde_json::from_str(text).map_err(|e| Error::param("circuit", e.to_string()))?;
        let spec = match parsed {
            CircuitFile::Full(spec) => spec,
            CircuitFile::Gates(gates) => {
                let wires = gates.iter().flat_map(Gate::wires).max().map_or(1, |w| w + 1);
                CircuitSpec { wires, gates }
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.wires == 0 {
            return Err(Error::param("wires", "a circuit needs at least one wire"));
        }
        for g in &self.gates {
            if let Some(w) = g.wires().find(|&w| w >= self.wires) {
                return Err(Error::QubitOutOfRange { index: w, num_qubits: self.wires });
            }
            if let Gate::Cz { a, b } = g {
                if a == b {
                    return Err(Error::IndexCollision(*a));
                }
            }
        }
        Ok(())
    }

    /// Applies the circuit directly to `input`.
    pub fn simulate(&self, input: &PureState) -> Result<PureState> {
        self.validate()?;
        if input.num_qubits() != self.wires {
            return Err(Error::DimensionMismatch(input.num_qubits(), self.wires));
        }
        let mut psi = input.clone();
        for g in &self.gates {
            match *g {
                Gate::Rz { wire, angle } => psi.apply_1q(wire, &gates::phase(angle))?,
                Gate::H { wire } => psi.apply_1q(wire, &gates::hadamard())?,
                Gate::Cz { a, b } => psi.apply_cz(a, b)?,
            }
        }
        Ok(psi)
    }
}

impl Gate {
    fn wires(&self) -> impl Iterator<Item = usize> {
        let (a, b) = match *self {
            Gate::Rz { wire, .. } | Gate::H { wire } => (wire, None),
            Gate::Cz { a, b } => (a, Some(b)),
        };
        std::iter::once(a).chain(b)
    }

    fn matrix(&self) -> Option<Mat2> {
        match *self {
            Gate::Rz { angle, .. } => Some(gates::phase(angle)),
            Gate::H { .. } => Some(gates::hadamard()),
            Gate::Cz { .. } => None,
        }
    }
}

/// The single-qubit map of one wire hop measured at `angle` with outcome 0:
/// `H diag(1, e^{-i angle})`.
pub fn hop_unitary(angle: f64) -> Mat2 {
    gates::matmul(&gates::hadamard(), &gates::phase(-angle))
}

/// Three hop angles whose composition equals `u` up to global phase.
pub fn compile_single_qubit(u: &Mat2) -> Result<[f64; 3]> {
    let defect = gates::unitarity_defect(u);
    if defect > 1e-9 {
        return Err(Error::NotUnitary(defect));
    }
    // u = H Rz(c) Rx(b) Rz(a), so Rz(c) Rx(b) Rz(a) = H u.
    let g = gates::matmul(&gates::hadamard(), u);
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let g = gates::scale(&g, Complex64::from_polar(1.0, -det.arg() / 2.0));
    let (g00, g10) = (g[0][0], g[1][0]);
    let b = 2.0 * g10.norm().atan2(g00.norm());
    let sum = if g00.norm() > DEGENERATE { -2.0 * g00.arg() } else { 0.0 };
    let diff = if g10.norm() > DEGENERATE { 2.0 * (g10.arg() + FRAC_PI_2) } else { 0.0 };
    let (a, c) = ((sum - diff) / 2.0, (sum + diff) / 2.0);
    Ok([-a, -b, -c])
}

/// The composition of three hops, first angle applied first.
pub fn rotation_unitary(angles: [f64; 3]) -> Mat2 {
    angles.iter().fold(gates::identity(), |acc, &t| gates::matmul(&hop_unitary(t), &acc))
}

/// Symbolic Pauli frame of a wire: XOR sets of measurement indices.
#[derive(Debug, Clone, Default)]
struct WireFrame {
    x: BTreeSet<usize>,
    z: BTreeSet<usize>,
}

fn toggle_all(set: &mut BTreeSet<usize>, other: &BTreeSet<usize>) {
    for &i in other {
        if !set.remove(&i) {
            set.insert(i);
        }
    }
}

struct Builder {
    heads: Vec<VertexId>,
    frames: Vec<WireFrame>,
    edges: BTreeSet<(VertexId, VertexId)>,
    measurements: Vec<Measurement>,
    next: VertexId,
}

impl Builder {
    fn toggle_edge(&mut self, a: VertexId, b: VertexId) {
        let e = (a.min(b), a.max(b));
        if !self.edges.remove(&e) {
            self.edges.insert(e);
        }
    }

    fn hop(&mut self, wire: usize, angle: f64) {
        let head = self.heads[wire];
        let fresh = self.next;
        self.next += 1;
        self.toggle_edge(head, fresh);
        let k = self.measurements.len();
        let frame = &mut self.frames[wire];
        self.measurements.push(Measurement {
            vertex: head,
            basis: PatternBasis::Xy(angle),
            adapt: frame.x.iter().copied().collect(),
        });
        let mut x = std::mem::take(&mut frame.z);
        toggle_all(&mut x, &BTreeSet::from([k]));
        frame.z = std::mem::replace(&mut frame.x, x);
        self.heads[wire] = fresh;
    }

    fn cz(&mut self, a: usize, b: usize) {
        self.toggle_edge(self.heads[a], self.heads[b]);
        let (xa, xb) = (self.frames[a].x.clone(), self.frames[b].x.clone());
        toggle_all(&mut self.frames[a].z, &xb);
        toggle_all(&mut self.frames[b].z, &xa);
    }

    fn flush(&mut self, pending: &mut [Option<Mat2>]) -> Result<()> {
        for wire in 0..pending.len() {
            if let Some(u) = pending[wire].take() {
                for angle in compile_single_qubit(&u)? {
                    self.hop(wire, angle);
                }
            }
        }
        Ok(())
    }
}

/// The four-vertex chain pattern realising three hops on one wire.
pub fn compile_rotation(angles: [f64; 3]) -> MeasurementPattern {
    let mut b = Builder {
        heads: vec![0],
        frames: vec![WireFrame::default()],
        edges: BTreeSet::new(),
        measurements: Vec::new(),
        next: 1,
    };
    for a in angles {
        b.hop(0, a);
    }
    finish(b, vec![0])
}

fn finish(b: Builder, inputs: Vec<VertexId>) -> MeasurementPattern {
    let corrections = b
        .heads
        .iter()
        .zip(&b.frames)
        .filter(|(_, f)| !f.x.is_empty() || !f.z.is_empty())
        .map(|(&vertex, f)| Correction { vertex, x: f.x.iter().copied().collect(), z: f.z.iter().copied().collect() })
        .collect();
    MeasurementPattern {
        inputs,
        outputs: b.heads,
        edges: b.edges.into_iter().collect(),
        measurements: b.measurements,
        corrections,
    }
}

/// Compiles a circuit into a blueprint graph and a measurement pattern.
///
/// Consecutive single-qubit gates on a wire merge into one unitary that
/// becomes three hops; a control-phase becomes an edge between the current
/// heads of its wires. Input vertices are `0..wires`.
pub fn compile_circuit(circuit: &CircuitSpec) -> Result<(GraphRegister, MeasurementPattern)> {
    circuit.validate()?;
    let wires = circuit.wires;
    let mut b = Builder {
        heads: (0..wires as VertexId).collect(),
        frames: vec![WireFrame::default(); wires],
        edges: BTreeSet::new(),
        measurements: Vec::new(),
        next: wires as VertexId,
    };
    let mut pending: Vec<Option<Mat2>> = vec![None; wires];
    for g in &circuit.gates {
        match (*g, g.matrix()) {
            (Gate::Cz { a, b: other }, _) => {
                let mut both: Vec<Option<Mat2>> = vec![None; wires];
                both[a] = pending[a].take();
                both[other] = pending[other].take();
                b.flush(&mut both)?;
                b.cz(a, other);
            }
            (Gate::Rz { wire, .. } | Gate::H { wire }, Some(u)) => {
                let acc = pending[wire].unwrap_or_else(gates::identity);
                pending[wire] = Some(gates::matmul(&u, &acc));
            }
            _ => unreachable!("single-qubit gates have matrices"),
        }
    }
    b.flush(&mut pending)?;
    let pattern = finish(b, (0..wires as VertexId).collect());
    let blueprint = pattern.blueprint()?;
    Ok((blueprint, pattern))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::ACCUMULATED_TOL;

    #[test]
    fn euler_angles_reproduce_unitaries() {
        let samples = [
            gates::identity(),
            gates::hadamard(),
            gates::pauli_x(),
            gates::pauli_y(),
            gates::phase(0.7),
            gates::x_phase(-1.3),
            gates::matmul(&gates::phase(0.4), &gates::matmul(&gates::x_phase(2.1), &gates::phase(-0.9))),
        ];
        for u in samples {
            let angles = compile_single_qubit(&u).unwrap();
            assert!(gates::equal_up_to_phase(&rotation_unitary(angles), &u, 1e-10), "{angles:?}");
        }
    }

    #[test]
    fn bit_flip_angles() {
        let u = rotation_unitary([0.0, FRAC_PI_2, -FRAC_PI_2]);
        assert!(u[0][0].norm() < 1e-12 && (u[1][0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_rz_is_a_four_chain() {
        let c = CircuitSpec { wires: 1, gates: vec![Gate::Rz { wire: 0, angle: 0.3 }] };
        let (g, p) = compile_circuit(&c).unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (1, 2), (2, 3)]);
        assert_eq!(p.outputs, vec![3]);
        assert_eq!(p.measurements.len(), 3);
        p.validate().unwrap();
    }

    #[test]
    fn bridge_topology_and_empty_circuit() {
        let c = CircuitSpec {
            wires: 2,
            gates: vec![Gate::H { wire: 0 }, Gate::H { wire: 1 }, Gate::Cz { a: 0, b: 1 }, Gate::H { wire: 0 }, Gate::H { wire: 1 }],
        };
        let (g, p) = compile_circuit(&c).unwrap();
        assert_eq!(g.len(), 14);
        assert_eq!(g.num_edges(), 13);
        assert_eq!(p.outputs.len(), 2);
        let empty = CircuitSpec { wires: 2, gates: vec![] };
        let (g, p) = compile_circuit(&empty).unwrap();
        assert_eq!((g.len(), g.num_edges()), (2, 0));
        assert_eq!(p.outputs, p.inputs);
        let psi = PureState::init_plus(2).unwrap();
        assert!(empty.simulate(&psi).unwrap().equal_up_to_global_phase(&psi, ACCUMULATED_TOL).unwrap());
    }

    #[test]
    fn circuit_file_forms() {
        let list = r#"[{"gate":"h","wire":0},{"gate":"cz","a":0,"b":2}]"#;
        assert_eq!(CircuitSpec::from_json(list).unwrap().wires, 3);
        let full = r#"{"wires":4,"gates":[{"gate":"rz","wire":1,"angle":0.5}]}"#;
        assert_eq!(CircuitSpec::from_json(full).unwrap().wires, 4);
        assert!(CircuitSpec::from_json(r#"[{"gate":"cz","a":1,"b":1}]"#).is_err());
    }
}
