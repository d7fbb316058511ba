//! Measurement-based computation on graph states.
//!
//! A qubit hops along a wire each time its vertex is measured in an
//! equatorial basis: measuring at angle `φ` with outcome `m` leaves
//! `X^m H diag(1, e^{-iφ})` applied to the state on the next vertex. Three
//! hops make an arbitrary single-qubit gate, and an edge between two wires
//! is a control-phase. Byproducts are tracked as a Pauli frame and fixed
//! on the outputs.

mod compile;
mod pattern;
mod prune;
mod run;

pub use compile::{compile_circuit, compile_rotation, compile_single_qubit, hop_unitary, rotation_unitary, CircuitSpec, Gate};
pub use pattern::{Correction, Measurement, MeasurementPattern, PatternBasis, PauliFrame};
pub use prune::{apply_prelude, prune_cluster, PreludeRecord, PreludeStep};
pub use run::{run_all_branches, run_pattern, Execution, OutcomeSource, PatternRun};
