//! Path-sum and state-vector simulation of linear-optical experiments, with
//! construction and verification of action-dual experiment pairs.
//!
//! The crate is organised bottom-up:
//!
//! * [`network`] describes experiments as directed graphs of optical elements
//!   and enumerates coarse-grained paths between boundary ports.
//! * [`path_sum`] turns path sets into amplitudes, joint tables and
//!   conditional probabilities.
//! * [`state`] is the independent state-vector backend (stage unitaries and
//!   the Born rule).
//! * [`duality`] builds time-reversed and pivot-reversed duals and compares
//!   their path sums term by term.
//! * [`channel`] covers the finite-dimensional entangled/single-system
//!   equivalence: time reversal, Schmidt form, the `W` bridge operator.
//! * [`bell`] computes correlators and CHSH values from joint tables.

pub mod bell;
pub mod channel;
pub mod duality;
pub mod linalg;
pub mod network;
pub mod path_sum;
pub mod phase;
pub mod state;

pub use network::{build_network, parse_network, ExperimentDoc, OpticalNetwork, PhaseMode};
