//! Exact dense simulation: pure states up to 20 qubits, density matrices up
//! to 10. Every other module is checked against this backend.

mod density;
pub mod gates;
mod keyed;
mod state;

pub use density::{reduced_density, DensityState, MAX_DENSITY_QUBITS};
pub use gates::{Mat2, Pauli};
pub use keyed::KeyedRegister;
pub use state::{Basis, MeasurementOutcome, PureState, ACCUMULATED_TOL, EXACT_TOL, MAX_PURE_QUBITS};
