//! Mediated exchange gates for spin qubits.
//!
//! Qubits that never touch each other can still be entangled by switching on
//! Heisenberg couplings to a shared ancilla spin at the same time. At special
//! evolution times the ancilla is returned to its initial state and the net
//! effect is a fixed multi-qubit gate, the *mediated gate*. This crate derives
//! those gates, characterizes them (Weyl chamber, Makhlin invariants,
//! entangling power) and synthesizes circuits that use them as the only
//! entangling resource.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! thread-pool execution live in the `medgate` companion crate.

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` style checks are meant to reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod eigen;
mod error;
mod math;

pub mod dynamics;
pub mod entanglement;
pub mod gates;
pub mod linalg;
pub mod optimize;
pub mod synthesis;

pub use error::{Error, Result};
pub use linalg::{C64, ComplexMatrix, QubitOrdering, StateVector, Unitary};

/// Tolerance used for unitarity, normalization and Hermiticity checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Objective value below which a synthesis run counts as converged.
pub const CONVERGENCE_THRESHOLD: f64 = 1e-14;
