//! Perturbative and semiclassical toolkit for one-dimensional
//! anharmonic oscillators.
//!
//! The crate builds, cross-validates and exploits two expansions of the
//! same spectrum: exact-rational perturbation theory in the quantum
//! frame ([`riccati_bloch`]) and the semiclassical series in the
//! classical frame ([`generalized_bloch`]), tied together by classical
//! relaxation paths and one-loop determinants ([`flucton`]), a matched
//! variational wavefunction ([`approximant`]) and an independent
//! high-accuracy eigensolver ([`reference`]).

pub mod approximant;
pub mod cli;
pub mod error;
pub mod exact;
pub mod flucton;
pub mod generalized_bloch;
pub mod jet;
pub mod potential;
pub mod quad;
pub mod reference;
pub mod riccati_bloch;

pub use error::{Error, Result};
pub use potential::{Frame, Kind, MassConvention, Potential};
