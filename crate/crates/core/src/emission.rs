//! Photon-emission probabilities through the three decay channels.
//!
//! Channel 1 is atomic decay out of the side of the cavity (`Γ |C_E|²`),
//! channels 2 and 3 are the outputs of modes `a` and `b` (`κ |C_G|²`,
//! `κ |C_F|²`). The time integrals are done in closed form over the residue
//! double sum.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{solve_two_mode, Amplitude, ResidueSolution};
use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Exponent sums below this magnitude use the `T` limit of the integral.
const SMALL_EXPONENT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Finite(f64),
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionProbabilities {
    /// Side loss through atomic decay.
    pub p1: f64,
    /// Mode `a` output.
    pub p2: f64,
    /// Mode `b` output.
    pub p3: f64,
    pub t: Horizon,
}

impl EmissionProbabilities {
    pub fn total(&self) -> f64 {
        self.p1 + self.p2 + self.p3
    }
}

/// `∫₀ᵀ |Σₙ cₙ e^{λₙ t}|² dt`.
fn occupation_integral(
    residues: &[Complex64; 3],
    lambdas: &[Complex64; 3],
    horizon: Horizon,
) -> Result<f64> {
    let mut total = Complex64::new(0.0, 0.0);
    for (cn, ln) in residues.iter().zip(lambdas) {
        for (cm, lm) in residues.iter().zip(lambdas) {
            let weight = cn * cm.conj();
            if weight == Complex64::new(0.0, 0.0) {
                continue;
            }
            let s = ln + lm.conj();
            let integral = match horizon {
                Horizon::Finite(t) if s.norm() < SMALL_EXPONENT => Complex64::new(t, 0.0),
                Horizon::Finite(t) => ((s * t).exp() - 1.0) / s,
                Horizon::Infinity if s.re < 0.0 => -1.0 / s,
                Horizon::Infinity => return Err(Error::NonDecayingMode),
            };
            total += weight * integral;
        }
    }
    Ok(total.re)
}

/// Probabilities of having emitted the photon through each channel by `t`.
pub fn emission_probabilities(
    solution: &ResidueSolution,
    params: &SystemParams,
    t: Horizon,
) -> Result<EmissionProbabilities> {
    match t {
        Horizon::Infinity if params.gamma == 0.0 && params.kappa == 0.0 => {
            return Err(Error::NoDecayChannels)
        }
        Horizon::Finite(t) if !(t >= 0.0) => {
            return Err(Error::InvalidGrid(format!(
                "emission time must be non-negative, got {t}"
            )))
        }
        _ => {}
    }
    let lambdas = &solution.eigen.lambdas;
    let channel = |which: Amplitude, rate: f64| -> Result<f64> {
        if rate == 0.0 {
            return Ok(0.0);
        }
        Ok(rate * occupation_integral(solution.residues(which), lambdas, t)?)
    };
    Ok(EmissionProbabilities {
        p1: channel(Amplitude::E, params.gamma)?,
        p2: channel(Amplitude::G, params.kappa)?,
        p3: channel(Amplitude::F, params.kappa)?,
        t,
    })
}

/// Total emission probabilities at each detuning of the grid.
///
/// Points where the residue form breaks down are kept as errors in place so
/// the rest of the sweep survives.
pub fn sweep_emission(
    params: &SystemParams,
    detuning_grid: &[f64],
) -> Result<Vec<Result<EmissionProbabilities>>> {
    if params.gamma + params.kappa <= 0.0 {
        return Err(Error::NoDecayChannels);
    }
    crate::params::validate(params).into_result()?;
    Ok(detuning_grid
        .par_iter()
        .map(|&dw| {
            let p = params.with_delta_omega(dw);
            let solution = solve_two_mode(&p)?;
            emission_probabilities(&solution, &p, Horizon::Infinity)
        })
        .collect())
}
