//! Simulation core for large-spin systems read out through restricted,
//! unsharp two-outcome tomography.
//!
//! The crate models a single spin-*j* degree of freedom (dimension `2j + 1`),
//! its unitary dynamics under a static anharmonic Hamiltonian plus
//! piecewise-constant control pulses, a fuzzy two-outcome readout of `J3`,
//! rotated copies of that readout obtained through control gates, and the
//! qubit-style state reconstruction an experimenter would perform from the
//! three resulting Stokes parameters.  Companion classical flows (mean-spin
//! precession, Stokes-vector flow, dephasing ensembles) provide the
//! semiclassical picture the quantum results are compared against.
//!
//! Modules:
//! - [`spin`]: spin quantum numbers, angular-momentum matrices, coherent and
//!   cat states, fluctuation diagnostics, window projections.
//! - [`model`]: static/control Hamiltonians and the Rydberg, Cooper-pair-box
//!   and two-mode-condensate presets that map onto them.
//! - [`dynamics`]: unitary propagation, classical and Stokes flows, dephasing
//!   ensembles.
//! - [`measurement`]: sensitivity functions, unsharp observables, shot
//!   sampling and Stokes estimation.
//! - [`gates`]: classical-flow pulse synthesis for rotation targets and
//!   quantum validation of the synthesized gates.
//! - [`tomography`]: Stokes bounds, normalization strategies, qubit
//!   reconstruction, Bloch-model fits and the final consistency report.

pub mod dynamics;
pub mod error;
pub mod gates;
pub mod linalg;
pub mod measurement;
pub mod model;
pub mod optimize;
pub mod rotations;
pub mod spin;
pub mod tomography;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector};
