//! Graph states stored as adjacency plus per-vertex local Cliffords.
//!
//! Control-phase gates, single-qubit Cliffords and Pauli measurements all
//! act on the graph and the vertex operators without touching amplitudes,
//! so registers with thousands of vertices are cheap. Small registers can
//! be expanded with [`GraphRegister::to_dense`] for checking.

mod clifford;
mod register;

use rand::Rng;

pub use clifford::{LocalClifford, GROUP_ORDER};
pub use register::{GraphRegister, PauliByproduct};

use crate::erasure::ParityPhase;
use crate::error::Result;
use crate::statevec::Pauli;

/// Stable vertex identifier; never reused within a register.
pub type VertexId = u32;

/// The operations growth and broker protocols need from a graph backend.
///
/// [`GraphRegister`] implements it directly; the verification mirror in
/// [`crate::verify`] implements it by running a dense oracle in lockstep.
pub trait GraphBackend {
    fn graph(&self) -> &GraphRegister;
    fn new_vertex(&mut self) -> Result<VertexId>;
    fn add_cz(&mut self, a: VertexId, b: VertexId) -> Result<()>;
    fn apply_local_clifford(&mut self, v: VertexId, c: LocalClifford) -> Result<()>;
    fn measure_pauli<R: Rng + ?Sized>(&mut self, v: VertexId, axis: Pauli, rng: &mut R) -> Result<u8>;
    fn parity_project(&mut self, a: VertexId, b: VertexId, phase: ParityPhase) -> Result<f64>;
}

impl GraphBackend for GraphRegister {
    fn graph(&self) -> &GraphRegister {
        self
    }

    fn new_vertex(&mut self) -> Result<VertexId> {
        Ok(GraphRegister::new_vertex(self))
    }

    fn add_cz(&mut self, a: VertexId, b: VertexId) -> Result<()> {
        GraphRegister::add_cz(self, a, b)
    }

    fn apply_local_clifford(&mut self, v: VertexId, c: LocalClifford) -> Result<()> {
        GraphRegister::apply_local_clifford(self, v, c)
    }

    fn measure_pauli<R: Rng + ?Sized>(&mut self, v: VertexId, axis: Pauli, rng: &mut R) -> Result<u8> {
        GraphRegister::measure_pauli(self, v, axis, rng)
    }

    fn parity_project(&mut self, a: VertexId, b: VertexId, phase: ParityPhase) -> Result<f64> {
        GraphRegister::parity_project(self, a, b, phase)
    }
}
