//! Exact two-photon simulation of linear-optical asymmetric phase-covariant
//! cloners for polarization qubits.
//!
//! The crate is organised bottom-up:
//!
//! - [`state`]: two-photon Fock states over labeled optical modes and their
//!   evolution under mode-scattering matrices (permanent rule).
//! - [`elements`]: beam splitters, polarization filters, wave plates, phase
//!   shifters and the Fresnel model of tilted glass-plate filters.
//! - [`cloner`]: the special-beam-splitter and fiber-coupler setups with
//!   coincidence postselection, fidelity estimators, twirling and scans.
//! - [`theory`]: closed-form fidelities, filter-ratio solvers and success
//!   probabilities.
//! - [`imperfections`]: mode-overlap, residual-phase and ancilla-offset
//!   models, HOM dip curves and overlap calibration.

pub mod cloner;
pub mod elements;
mod error;
pub mod imperfections;
pub mod state;
pub mod theory;

pub use error::{Error, Result};

pub use num_complex::Complex64;
