//! State-vector simulation of the two-site Fermi-Hubbard Renyi-entropy
//! experiment: digitized adiabatic state preparation, ancilla-controlled swap
//! test on two copies, lowering onto trapped-ion native gates, stochastic
//! gate and readout noise, and Trotter-error scaling studies.

// Parameter checks are written as `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adiabatic;
pub mod analysis;
pub mod circuit;
pub mod cli;
pub mod compiler;
pub mod error;
pub mod gate;
pub mod hubbard;
pub mod noise;
pub mod renyi;
pub mod shots;
pub mod state;

pub use circuit::Circuit;
pub use error::{Result, SimError};
pub use gate::{Gate, GateKind};
pub use shots::ShotRecord;
pub use state::{PauliString, StateVector};
