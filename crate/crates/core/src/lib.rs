//! Simulation engine for a single-photon triggered first-order quantum phase
//! transition in an all-to-all coupled qubit amplifier (LMG model).
//!
//! The crate is split along the physics:
//!
//! * [`dicke`]: collective-spin operators in the symmetric |S,m⟩ sector.
//! * [`eigen`]: lowest eigenpairs of real symmetric banded matrices.
//! * [`lmg`]: amplifier Hamiltonian, ground state, order parameters and correlators.
//! * [`criticality`]: field / size sweeps and power-law fits.
//! * [`absorber`]: single-photon Fock-state master equation for the Λ absorber.
//! * [`amplifier`]: driven amplifier dynamics, quantum gain and spin Q-function.
//! * [`harness`]: experiment registry, config, outputs and the brute-force oracle.

// `!(x > y)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod absorber;
pub mod amplifier;
pub mod criticality;
pub mod dicke;
pub mod eigen;
pub mod error;
pub mod harness;
pub mod lmg;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
