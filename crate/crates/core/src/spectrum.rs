//! Time-integrated spontaneous-emission spectrum of the cavity output.
//!
//! The double time integral defining each mode spectrum factorizes into the
//! squared modulus of a one-sided transform,
//! `S_mode(Δ) = |∫₀^∞ C_K(t) e^{iΔt} dt|²`, which the residue form gives in
//! closed form as `Σₙ cₙ / (-λₙ - iΔ)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{Amplitude, ResidueSolution};
use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Peaks below this fraction of the component maximum are ignored.
pub const PEAK_FLOOR: f64 = 1e-6;
/// Minimum index distance between two reported peaks.
pub const PEAK_MIN_SEPARATION: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Mode `a`, fed by `C_G`.
    A,
    /// Mode `b`, fed by `C_F`.
    B,
}

impl Mode {
    fn amplitude(self) -> Amplitude {
        match self {
            Mode::A => Amplitude::G,
            Mode::B => Amplitude::F,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub location: f64,
    pub height: f64,
}

/// Sampled total spectrum with its per-mode components and peaks.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumGrid {
    pub omega_axis: Vec<f64>,
    /// `κ/(2π) (s_a + s_b)`.
    pub s_total: Vec<f64>,
    pub s_a: Vec<f64>,
    pub s_b: Vec<f64>,
    pub peaks_a: Vec<Peak>,
    pub peaks_b: Vec<Peak>,
}

fn ensure_decaying(solution: &ResidueSolution) -> Result<()> {
    if solution.eigen.lambdas.iter().all(|l| l.re < 0.0) {
        Ok(())
    } else {
        Err(Error::NonDecayingMode)
    }
}

/// One-sided transform `∫₀^∞ C_K(t) e^{iΔt} dt` of the amplitude feeding `mode`.
pub fn mode_transform(solution: &ResidueSolution, mode: Mode, detuning: f64) -> Complex64 {
    let shift = Complex64::new(0.0, detuning);
    solution
        .residues(mode.amplitude())
        .iter()
        .zip(&solution.eigen.lambdas)
        .map(|(c, l)| c / (-l - shift))
        .sum()
}

/// `S_mode(Δ)` at each detuning `Δ = ω - ω_mode` of the axis.
pub fn mode_spectrum(
    solution: &ResidueSolution,
    mode: Mode,
    detuning_axis: &[f64],
) -> Result<Vec<f64>> {
    ensure_decaying(solution)?;
    Ok(detuning_axis
        .par_iter()
        .map(|&d| mode_transform(solution, mode, d).norm_sqr())
        .collect())
}

/// Local maxima above `PEAK_FLOOR` of the global maximum; of two maxima
/// closer than `PEAK_MIN_SEPARATION` samples only the higher one is kept.
pub fn detect_peaks(axis: &[f64], values: &[f64]) -> Vec<Peak> {
    let global = values.iter().copied().fold(0.0, f64::max);
    if global <= 0.0 || values.len() < 3 {
        return Vec::new();
    }
    let floor = PEAK_FLOOR * global;
    let mut candidates: Vec<usize> = (1..values.len() - 1)
        .filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1] && values[i] > floor)
        .collect();
    // Greedy by height so the dominant of two neighbours survives.
    candidates.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let mut kept: Vec<usize> = Vec::new();
    for i in candidates {
        if kept.iter().all(|&k| k.abs_diff(i) >= PEAK_MIN_SEPARATION) {
            kept.push(i);
        }
    }
    kept.sort_unstable();
    kept.into_iter()
        .map(|i| Peak {
            location: axis[i],
            height: values[i],
        })
        .collect()
}

/// Total spectrum on an absolute frequency axis, with `omega_a` and `omega_b`
/// as the component origins. With both carriers at zero the axis is a plain
/// detuning axis shared by the two components.
pub fn full_spectrum(
    solution: &ResidueSolution,
    params: &SystemParams,
    omega_axis: &[f64],
) -> Result<SpectrumGrid> {
    let to_a: Vec<f64> = omega_axis.iter().map(|w| w - params.omega_a).collect();
    let to_b: Vec<f64> = omega_axis.iter().map(|w| w - params.omega_b).collect();
    let s_a = mode_spectrum(solution, Mode::A, &to_a)?;
    let s_b = mode_spectrum(solution, Mode::B, &to_b)?;
    let weight = params.kappa / (2.0 * PI);
    let s_total = s_a
        .iter()
        .zip(&s_b)
        .map(|(a, b)| weight * (a + b))
        .collect();
    Ok(SpectrumGrid {
        peaks_a: detect_peaks(omega_axis, &s_a),
        peaks_b: detect_peaks(omega_axis, &s_b),
        omega_axis: omega_axis.to_vec(),
        s_total,
        s_a,
        s_b,
    })
}
