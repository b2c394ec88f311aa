//! Dense state-vector simulation.
//!
//! Bit order: in a bitstring, and in the binary expansion of an amplitude
//! index, the leftmost position is qubit 0. For `n` qubits, qubit `q` is bit
//! `n - 1 - q` of the index.

mod sampling;
mod state;
mod tomography;
mod unitary;

use thiserror::Error;

pub(crate) use sampling::sample_counts_with;
pub use sampling::{postselect_counts, sample_counts, Counts};
pub use state::{apply_gate, postselect, run_statevector, StateVector};
pub use tomography::{
    analytic_expectations, bloch_vector, fidelity_from_expectations, pauli_expectations,
    PauliExpectations, HARDWARE_FIDELITY_ALTERNATING_B, HARDWARE_FIDELITY_UNIFORM_B,
};
pub use unitary::{circuit_unitary, Unitary, MAX_UNITARY_QUBITS};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    IndexOutOfRange { index: usize, n_qubits: usize },
    #[error("CNOT control and target are both q{0}")]
    EqualControlTarget(usize),
    #[error("circuit has {circuit} qubits but the state has {state}")]
    QubitMismatch { circuit: usize, state: usize },
    #[error("{0} qubits exceeds the simulator limit")]
    TooManyQubits(usize),
    #[error("amplitude vector of length {0} is not a power of two")]
    BadLength(usize),
    #[error("state norm {0} is not 1")]
    NotNormalized(f64),
    #[error("post-selection branch has zero probability")]
    ZeroProbabilityBranch,
    #[error("shots must be at least 1")]
    ZeroShots,
    #[error("no shots survive post-selection")]
    NoSurvivingShots,
    #[error("count table is empty")]
    EmptyCounts,
    #[error("counts key `{0}` is not a bitstring of the table width")]
    BadBitstring(String),
    #[error("Bloch vector norm {norm} exceeds 1 beyond statistical tolerance {tolerance}")]
    InconsistentTomography { norm: f64, tolerance: f64 },
    #[error("malformed circuit: {0}")]
    Circuit(#[from] crate::circ::CircError),
}
