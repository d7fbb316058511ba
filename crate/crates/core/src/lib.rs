//! Simulation of measurement-based quantum computing on a network of
//! optically linked spin qubits.
//!
//! The crate is layered:
//!
//! - [`statevec`] is an exact dense backend used as ground truth.
//! - [`graph`] stores graph states as adjacency plus local Cliffords and
//!   scales to thousands of vertices.
//! - [`erasure`] models one heralded entanglement attempt through a beam
//!   splitter, including loss and dark counts.
//! - [`growth`] grows graph states from probabilistic links, either by
//!   branch growth or through broker qubits.
//! - [`mbqc`] compiles small circuits to measurement patterns and runs them
//!   with Pauli-frame feed-forward.
//! - [`budget`] turns hardware parameters into link and coherence budgets.
//! - [`verify`] holds the oracle-equivalence suites that tie them together.
//!
//! A guide with worked examples lives in the `book/` directory at the root
//! of the repository; its code listings are compiled as doc-tests of this
//! crate.

pub mod budget;
pub mod erasure;
mod error;
pub mod graph;
pub mod growth;
pub mod lu;
pub mod mbqc;
pub mod seed;
pub mod statevec;
pub mod verify;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/entanglement.md")]
    mod entanglement {}
    #[doc = include_str!("../../../book/src/graph_states.md")]
    mod graph_states {}
    #[doc = include_str!("../../../book/src/patterns.md")]
    mod patterns {}
    #[doc = include_str!("../../../book/src/growth.md")]
    mod growth {}
    #[doc = include_str!("../../../book/src/budgets.md")]
    mod budgets {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
