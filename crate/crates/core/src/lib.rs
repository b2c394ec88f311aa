//! Masked delegation of a 2x2 quantum linear-system solver.
//!
//! A client hides the right-hand side of `A x = b` behind a binary additive
//! key, compiles an HHL-style circuit for the masked system onto a star-shaped
//! Clifford+T device, ships it to an untrusted execution server, and unmasks
//! the result.
//!
//! * [`qsim`]: state-vector simulation, sampling, post-selection, tomography.
//! * [`circ`]: circuit IR, text format and hardware rewrite passes.
//! * [`synth`]: single-qubit Clifford+T enumeration and approximation.
//! * [`hhl`]: eigen-decomposition, circuit builders, solution recovery.
//! * [`hecrypt`]: key generation, masking, unmasking, encrypted solves.
//! * [`qserve`]: framed JSON job server and client transport.

pub mod circ;
pub mod fmt;
pub mod hecrypt;
pub mod hhl;
pub mod qserve;
pub mod qsim;
pub mod synth;

pub use circ::{Basis, Circuit, CliffordT, Gate, Role, Topology};
pub use hecrypt::{MaskKey, MaskedSystem};
pub use hhl::{EigenDecomp, LinearSystem, SolutionReport, SolverConfig};
pub use qsim::{Counts, PauliExpectations, StateVector, Unitary};
