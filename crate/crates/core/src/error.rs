use thiserror::Error;

use crate::graph::VertexId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{requested} qubits exceeds the backend limit of {limit}")]
    SizeLimit { requested: usize, limit: usize },

    #[error("qubit index {index} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("operation needs two distinct qubits, got {0} twice")]
    IndexCollision(usize),

    #[error("matrix is not unitary (max deviation of U^dagger U from I is {0:e})")]
    NotUnitary(f64),

    #[error("state is not normalised (squared norm {0})")]
    NotNormalized(f64),

    #[error("amplitude vector of length {0} is not a power of two")]
    BadLength(usize),

    #[error("measurement outcome {outcome} has zero probability")]
    ZeroProbability { outcome: u8 },

    #[error("dimension mismatch: {0} qubits vs {1} qubits")]
    DimensionMismatch(usize, usize),

    #[error("mixture weights sum to {0}, expected 1")]
    BadMixture(f64),

    #[error("vertex {0} is not live")]
    DeadVertex(VertexId),

    #[error("local Clifford index {0} is outside 0..24")]
    BadClifford(u8),

    #[error("parity projection annihilated the state (no odd-parity component)")]
    ZeroNorm,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("vertex {0} is not the tip of a live branch")]
    NotBranchTip(VertexId),

    #[error("broker precondition violated: {0}")]
    BrokerState(String),

    #[error("target graph cannot be carved from a {rows}x{cols} cluster: {reason}")]
    Unembeddable { rows: usize, cols: usize, reason: String },

    #[error("pattern does not match blueprint: {0}")]
    PatternMismatch(String),

    #[error("graph backend and dense oracle disagree: {0}")]
    OracleMismatch(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
