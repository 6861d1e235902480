//! Simulation of double-quantum excitation in a pair of near-equivalent
//! spin-1/2 nuclei.
//!
//! Everything lives in the 4-dimensional singlet/triplet basis
//! `|1> = S0`, `|2> = T+1`, `|3> = T0`, `|4> = T-1`. Angular frequencies
//! (rad/s) are the internal unit; Hz only appears in [`SpinSystem`]
//! constructors and at the CLI boundary.

pub mod analytics;
pub mod error;
pub mod experiments;
pub mod hamiltonian;
pub mod propagate;
pub mod sequences;
pub mod spincore;

pub use error::{Error, Result};
pub use hamiltonian::{RfParams, SpinSystem};
pub use propagate::{Event, PhaseCycleSpec, Sequence};
pub use spincore::{Axis, Basis, Operator};

pub use num_complex::Complex64;
