//! Simulator and benchmark harness for quantum computing with ion-pair
//! qubits.
//!
//! Each logical qubit lives in two trapped ions, `|0> = |eg>` and
//! `|1> = |ge>`. The two states are degenerate, so free evolution between
//! gates only contributes a global phase. The crate provides:
//!
//! - [`sim`]: dense complex state vectors and gate matrices,
//! - [`ion`]: the physical pair model (effective Rabi frequency, pulse
//!   calibration, free evolution, encoding),
//! - [`gates`]: the named gate set with its verified identities,
//! - [`grover`]: the two-qubit Grover search with full traces,
//! - [`bench`]: seeded Monte Carlo sweeps for delay and dephasing robustness.

// `!(x > 0.0)` style checks are kept so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod error;
pub mod gates;
pub mod grover;
pub mod ion;
pub mod sim;

pub use error::{Error, Result};
pub use sim::{Complex, GateMatrix, StateVector};
