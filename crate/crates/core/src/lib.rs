//! Opcode-sequence malware classifiers built on a from-scratch embedding +
//! LSTM network, together with the tooling to study which hyper-parameters
//! matter: corpus preprocessing, a grid-search harness, and an
//! interaction-controlled importance analysis over standardized losses.
//!
//! The crate is organised by pipeline stage:
//!
//! * [`data`] turns disassembly text (or a synthetic Markov corpus) into
//!   balanced, integer-encoded, padded samples.
//! * [`neural`] holds the network, BPTT, dropout and the Adam/RMSprop
//!   optimizers.
//! * [`harness`] enumerates hyper-parameter grids, models the memory budget
//!   and runs deterministic short trainings, persisting one CSV row per epoch.
//! * [`analysis`] ranks hyper-parameters by hierarchical selection over
//!   standardized validation losses.

pub mod analysis;
pub mod data;
pub mod error;
pub mod harness;
pub mod neural;
pub mod seed;

pub use error::{Error, ErrorKind, Result};
