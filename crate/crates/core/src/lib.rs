//! Simulation core for fault-tolerant Steane-code error correction on a static
//! trapped-ion string with crosstalk.
//!
//! The crate is `no_std` (with `alloc`) and contains the simulators, the noise
//! stack, the protocol and the estimators. File formats, configuration and the
//! command line live in the `ionqec` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analytics;
pub mod backend;
pub mod circuit;
pub mod dense;
pub mod estimator;
pub mod executor;
pub mod frame;
pub mod noise;
pub mod pauli;
pub mod rng;
pub mod steane;
pub mod tableau;

pub use dense::{DenseError, DenseState};
pub use pauli::{Pauli, PauliString, Phase};
pub use tableau::{Axis, CliffordGate, StabilizerTableau, TableauError};
