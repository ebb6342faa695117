//! Exact single-excitation dynamics of a vibronic emitter coupled to a lossy
//! two-mode cavity.
//!
//! The emitter's electronic transition is resonant with cavity mode `a`; a
//! Raman (vibration-assisted) transition couples it to mode `b`, detuned by
//! `delta_omega` from exact Raman resonance. With a single excitation the state
//! lives in a three-dimensional space spanned by
//!
//! * `E`: emitter excited, both modes empty,
//! * `G`: emitter in the ground state, one photon in mode `a`,
//! * `F`: emitter in the ground state with one vibrational quantum, one photon
//!   in mode `b`,
//!
//! and the slowly varying amplitudes obey a linear system `dC/dt = M C`.
//! Everything in this crate is built on the closed (residue) form of that
//! system, with [`oracle`] providing an independent Runge-Kutta integrator
//! to check against.

// `!(x < y)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod eigen;
pub mod emission;
mod error;
pub mod oracle;
pub mod params;
pub mod quadrature;
pub mod spectrum;
pub mod table;

pub use num_complex::Complex64;

pub use dynamics::{
    sample_trajectory, solve_single_mode, solve_two_mode, Amplitude, ResidueSolution,
    SingleModeForm, SingleModeSolution, TrajectorySample,
};
pub use eigen::{
    characteristic_cubic, solve_cubic, sweep_eigenvalues, BranchLabel, CubicCoefficients,
    EigenTriple,
};
pub use emission::{emission_probabilities, sweep_emission, EmissionProbabilities, Horizon};
pub use error::{Error, Result};
pub use params::{
    validate, validate_single_mode, SingleModeParams, SystemParams, ValidationReport,
};
pub use spectrum::{full_spectrum, mode_spectrum, Mode, Peak, SpectrumGrid};
