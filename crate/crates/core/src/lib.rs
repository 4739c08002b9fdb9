//! Light-cone bounds for nonlocal Schrodinger dynamics on finite lattices.
//!
//! The crate assembles nonlocal operators from radial kernels, builds the
//! smooth cutoffs and adiabatic time-dependent observables used to localize
//! the dynamics, propagates states, and checks the resulting operator and
//! state inequalities numerically.

pub mod cutoff;
pub mod error;
pub mod kernelop;
pub mod lab;
pub mod lattice;
pub mod opcalc;
pub mod propagate;
pub mod linalg;
pub mod quad;
pub mod verify;

pub use error::{LabError, Result};
