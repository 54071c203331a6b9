//! Exact simulation of quantum passwords.
//!
//! A password is a string of Haar-random qubits issued by a server (Bob) to a
//! user (Alice). Bob verifies a submitted password qubit by qubit with a SWAP
//! test against his stored copy. Because the qubits are unknown to everyone
//! but Bob, an eavesdropper (Eve) can only approximate a copy, and every
//! approximation disturbs the original.
//!
//! Modules:
//! - [`qcore`]: dense states, gates, measurement, partial trace, noise maps.
//! - [`protocol`]: account setup, transmission, SWAP-test verification,
//!   Bob's integrity check and regeneration.
//! - [`adversary`]: cloning machines and attack simulation.
//! - [`experiments`]: seeded sweeps and confidence intervals.

pub mod adversary;
pub mod error;
pub mod experiments;
pub mod protocol;
pub mod qcore;

pub use error::{QpError, Result};
pub use qcore::*;
