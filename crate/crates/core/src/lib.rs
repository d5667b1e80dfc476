//! Stationary theory of a single-atom laser with incoherent pumping.
//!
//! The crate evaluates the coefficient table of the fifth-order equation
//! for the phase-averaged Husimi function, builds the asymptotic solutions
//! of that equation and their photon statistics, and provides an exact
//! master-equation steady state against which all of it is checked.

pub mod coeffs;
mod error;
pub mod linear_theory;
pub mod numerics;
pub mod oracle;
pub mod params;
pub mod qsolution;

pub use error::{Error, Result};
