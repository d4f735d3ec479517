//! Spin-Hamiltonian spectra, Ornstein-Uhlenbeck dephasing and coherence-time
//! analysis for nitrogen-vacancy centers in diamond under static electric
//! fields.
//!
//! All quantities are SI internally (V/m, T, s, Hz). Angular frequencies
//! (rad/s) appear only in Hamiltonian matrices and in the coherence formulas.

pub mod coherence;
pub mod constants;
pub mod electrostatics;
mod error;
pub mod field;
pub mod fitting;
pub mod hamiltonian;
pub mod noise;
pub mod params;
pub mod units;

pub use coherence::{DecayCurve, NoiseEnvironment, SequenceKind};
pub use constants::PhysicalConstants;
pub use error::{Error, Result};
pub use field::{FieldVector, SphericalDirection};
pub use hamiltonian::{Branch, EigenSystem, HamiltonianMatrix, ResonanceSet, StateLabel};
pub use noise::{NoisePath, OuParams};
pub use params::NvParameters;
