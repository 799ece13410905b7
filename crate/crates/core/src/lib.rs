//! Monte Carlo and exhaustive fault analysis of ancilla verification versus
//! ancilla decoding for Steane-code error correction.
//!
//! Errors are tracked as Pauli frames through scheduled Clifford circuits
//! ([`frame`]) under an independent gate-error model ([`noise`]). The
//! [`protocols`] module assembles the QEC gadgets, [`experiments`] estimates
//! logical error rates, and [`oracle`] cross-checks everything against an
//! exact fault enumeration and a stabilizer-tableau simulator.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod figures;
pub mod frame;
pub mod noise;
pub mod oracle;
pub mod protocols;
pub mod report;
pub mod steane;

pub use error::{Error, Result};
