//! Spectrum, coherence and gate-infidelity modeling for single-mode
//! superconducting qubits with a single-well potential (unimon and relatives),
//! with transmon and fluxonium baselines for comparison.
//!
//! The building blocks are layered:
//!
//! * [`model`]: parameter records and unit conversions,
//! * [`variational`]: closed-form estimates of the three lowest levels,
//! * [`eigen`]: finite-difference diagonalization, matrix elements, flux curvature,
//! * [`coherence`] and [`fidelity`]: relaxation, dephasing and gate infidelity,
//! * [`design`]: inverse design mapping and grid sweeps,
//! * [`compare`]: flux profiles of the built-in reference qubits,
//! * [`acceptance`]: the end-to-end validation suite.

pub mod acceptance;
pub mod coherence;
pub mod compare;
pub mod design;
pub mod eigen;
pub mod error;
pub mod exec;
pub mod fidelity;
pub mod model;
pub mod numeric;
pub mod report;
pub mod tridiag;
pub mod variational;

pub use error::{Error, Result};
pub use model::{CircuitEnergies, DimensionlessPotential, NoiseEnvironment};
