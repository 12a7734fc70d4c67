//! Dephasing two-level system toolkit.
//!
//! Closed-form Bloch-equation solutions and measurement traces for five
//! Hamiltonian/dephasing model variants ([`model`]), an independent numerical
//! propagator used as an oracle ([`oracle`]), finite-shot measurement
//! simulation with CSV/JSON interchange ([`experiment`]), and least-squares
//! model discrimination with identifiability diagnostics ([`discriminator`]).
//!
//! Units: ħ = 1, frequencies in rad per unit time, rates in 1 per unit time,
//! angles in radians.

pub mod discriminator;
pub mod error;
pub mod experiment;
pub mod model;
pub mod oracle;

pub use error::{Error, Result};
pub use model::{BlochVector, ExperimentGeometry, ModelKind, ModelParams};
