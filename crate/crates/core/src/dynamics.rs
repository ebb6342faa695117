//! Closed-form amplitudes of the one- and two-mode systems.
//!
//! For simple eigenvalues every amplitude is a sum of exponentials,
//! `C_K(t) = Σₙ cₙ⁽ᴷ⁾ exp(λₙ t)`, with residues
//! `cₙ⁽ᴷ⁾ = adj(λₙ I - M)[K][E] / p'(λₙ)` projecting the initial state `E`.

use num_complex::Complex64;

use crate::eigen::{self, amplitude_matrix, characteristic_cubic, EigenTriple, Matrix3};
use crate::error::{Error, Result};
use crate::params::{validate, validate_single_mode, SingleModeParams, SystemParams};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Tolerance of the self-checks run while building a solution.
const SELF_CHECK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Amplitude {
    E,
    G,
    F,
}

/// Eigenvalues plus residue coefficients of `C_E`, `C_G` and `C_F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidueSolution {
    pub eigen: EigenTriple,
    pub residues_e: [Complex64; 3],
    pub residues_g: [Complex64; 3],
    pub residues_f: [Complex64; 3],
}

impl ResidueSolution {
    pub fn residues(&self, which: Amplitude) -> &[Complex64; 3] {
        match which {
            Amplitude::E => &self.residues_e,
            Amplitude::G => &self.residues_g,
            Amplitude::F => &self.residues_f,
        }
    }

    pub fn amplitude(&self, which: Amplitude, t: f64) -> Complex64 {
        self.residues(which)
            .iter()
            .zip(&self.eigen.lambdas)
            .map(|(c, l)| c * (l * t).exp())
            .sum()
    }

    /// `(C_E, C_G, C_F)` at time `t`.
    pub fn amplitudes(&self, t: f64) -> [Complex64; 3] {
        let phases = self.eigen.lambdas.map(|l| (l * t).exp());
        let sum =
            |c: &[Complex64; 3]| -> Complex64 { c.iter().zip(&phases).map(|(c, p)| c * p).sum() };
        [
            sum(&self.residues_e),
            sum(&self.residues_g),
            sum(&self.residues_f),
        ]
    }
}

/// First column of the adjugate of `a`.
fn adjugate_first_column(a: &Matrix3) -> [Complex64; 3] {
    [
        a[1][1] * a[2][2] - a[1][2] * a[2][1],
        -(a[1][0] * a[2][2] - a[1][2] * a[2][0]),
        a[1][0] * a[2][1] - a[1][1] * a[2][0],
    ]
}

/// Residue-form solution of the two-mode system started in `E`.
pub fn solve_two_mode(params: &SystemParams) -> Result<ResidueSolution> {
    validate(params).into_result()?;
    let m = amplitude_matrix(params);
    let cubic = characteristic_cubic(params);
    let eigen = eigen::solve_cubic(&cubic)?;
    if eigen.degenerate {
        return Err(Error::DegenerateSpectrum);
    }

    let mut residues = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (n, &lambda) in eigen.lambdas.iter().enumerate() {
        let mut a = m.map(|row| row.map(|x| -x));
        for (k, row) in a.iter_mut().enumerate() {
            row[k] += lambda;
        }
        let column = adjugate_first_column(&a);
        let slope = cubic.derivative(lambda);
        for k in 0..3 {
            residues[k][n] = column[k] / slope;
        }
    }
    let solution = ResidueSolution {
        eigen,
        residues_e: residues[0],
        residues_g: residues[1],
        residues_f: residues[2],
    };

    // C(0) = (1, 0, 0). A failure here means the eigenvalues are too close for
    // the residue form to be trusted.
    let initial = solution.amplitudes(0.0);
    let target = [1.0, 0.0, 0.0];
    let sum_scale: f64 = residues
        .iter()
        .flatten()
        .map(|c| c.norm())
        .fold(1.0, f64::max);
    for (c, t) in initial.iter().zip(target) {
        if (c - t).norm() > SELF_CHECK_TOL * sum_scale {
            return Err(Error::DegenerateSpectrum);
        }
    }
    Ok(solution)
}

/// Amplitudes and occupations at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub amp_e: Complex64,
    pub amp_g: Complex64,
    pub amp_f: Complex64,
    pub occ_e: f64,
    pub occ_g: f64,
    pub occ_f: f64,
    pub norm: f64,
}

impl TrajectorySample {
    fn new(t: f64, [amp_e, amp_g, amp_f]: [Complex64; 3]) -> Self {
        let (occ_e, occ_g, occ_f) = (amp_e.norm_sqr(), amp_g.norm_sqr(), amp_f.norm_sqr());
        Self {
            t,
            amp_e,
            amp_g,
            amp_f,
            occ_e,
            occ_g,
            occ_f,
            norm: occ_e + occ_g + occ_f,
        }
    }
}

/// Evaluates the residue sums independently at every grid time.
pub fn sample_trajectory(solution: &ResidueSolution, time_grid: &[f64]) -> Vec<TrajectorySample> {
    time_grid
        .iter()
        .map(|&t| TrajectorySample::new(t, solution.amplitudes(t)))
        .collect()
}

/// Which closed form a single-mode solution is evaluated with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SingleModeForm {
    /// `C_E = (g/Ω) cos(Ωt + φ) e^{-(κ+Γ)t/4}`, `C_G = -i (g/Ω) sin(Ωt) e^{-(κ+Γ)t/4}`
    /// with `Ω² = g² - ((κ - Γ - 2iδ)/4)²` and `tan φ = -(κ - Γ + 2iδ)/(4Ω)`.
    Printed { omega_r: Complex64, phi: Complex64 },
    /// Two-exponential residue form of the 2×2 system.
    Residue {
        lambdas: [Complex64; 2],
        residues_e: [Complex64; 2],
        residues_g: [Complex64; 2],
    },
}

/// Closed-form one-mode amplitudes.
///
/// `C_G` is taken in the frame where the 2×2 system has constant coefficients,
/// `dC_E/dt = -(Γ/2) C_E - i g C_G`, `dC_G/dt = -(κ/2 + iδω_a) C_G - i g C_E`.
/// Occupations are frame independent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleModeSolution {
    pub params: SingleModeParams,
    pub form: SingleModeForm,
}

fn single_mode_matrix(p: &SingleModeParams) -> [[Complex64; 2]; 2] {
    [
        [Complex64::new(-p.gamma / 2.0, 0.0), -I * p.g_a],
        [-I * p.g_a, Complex64::new(-p.kappa / 2.0, -p.delta_omega_a)],
    ]
}

impl SingleModeSolution {
    /// `(C_E, C_G)` at time `t`.
    pub fn amplitudes(&self, t: f64) -> (Complex64, Complex64) {
        match self.form {
            SingleModeForm::Printed { omega_r, phi } => {
                let p = &self.params;
                let envelope = (-(p.kappa + p.gamma) * t / 4.0).exp();
                let weight = p.g_a / omega_r;
                (
                    weight * (omega_r * t + phi).cos() * envelope,
                    -I * weight * (omega_r * t).sin() * envelope,
                )
            }
            SingleModeForm::Residue {
                lambdas,
                residues_e,
                residues_g,
            } => {
                let phases = lambdas.map(|l| (l * t).exp());
                (
                    residues_e[0] * phases[0] + residues_e[1] * phases[1],
                    residues_g[0] * phases[0] + residues_g[1] * phases[1],
                )
            }
        }
    }

    pub fn is_printed_form(&self) -> bool {
        matches!(self.form, SingleModeForm::Printed { .. })
    }

    /// Samples with `amp_f = 0`.
    pub fn sample(&self, time_grid: &[f64]) -> Vec<TrajectorySample> {
        time_grid
            .iter()
            .map(|&t| {
                let (e, g) = self.amplitudes(t);
                TrajectorySample::new(t, [e, g, Complex64::new(0.0, 0.0)])
            })
            .collect()
    }
}

/// Tries the printed cosine/sine form and keeps it only if it is a solution
/// of the 2×2 system with `C(0) = (1, 0)`; otherwise uses the residue form.
pub fn solve_single_mode(params: &SingleModeParams) -> Result<SingleModeSolution> {
    validate_single_mode(params).into_result()?;
    let p = *params;
    let m = single_mode_matrix(&p);
    let trace = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let half_split = (trace * trace / 4.0 - det).sqrt();
    let lambdas = [trace / 2.0 + half_split, trace / 2.0 - half_split];
    let scale = lambdas.iter().map(|l| l.norm()).fold(p.g_a, f64::max);
    if half_split.norm() < eigen::DEGENERACY_TOL * scale {
        return Err(Error::DegenerateTwoLevel);
    }

    let detuning = Complex64::new(0.0, 2.0 * p.delta_omega_a);
    let loss_gap = Complex64::new(p.kappa - p.gamma, 0.0);
    let omega_r = (p.g_a * p.g_a - ((loss_gap - detuning) / 4.0).powu(2)).sqrt();
    if omega_r.norm() < eigen::DEGENERACY_TOL * scale {
        return Err(Error::DegenerateTwoLevel);
    }
    let phi = (-(loss_gap + detuning) / (4.0 * omega_r)).atan();
    let printed = SingleModeSolution {
        params: p,
        form: SingleModeForm::Printed { omega_r, phi },
    };
    if printed_form_conforms(&printed, &m, trace, det) {
        return Ok(printed);
    }

    let gap = lambdas[0] - lambdas[1];
    let residues_e = [(lambdas[0] - m[1][1]) / gap, -(lambdas[1] - m[1][1]) / gap];
    let residues_g = [m[1][0] / gap, -m[1][0] / gap];
    Ok(SingleModeSolution {
        params: p,
        form: SingleModeForm::Residue {
            lambdas,
            residues_e,
            residues_g,
        },
    })
}

fn printed_form_conforms(
    candidate: &SingleModeSolution,
    m: &[[Complex64; 2]; 2],
    trace: Complex64,
    det: Complex64,
) -> bool {
    let SingleModeForm::Printed { omega_r, phi } = candidate.form else {
        return false;
    };
    if !(omega_r.is_finite() && phi.is_finite()) {
        return false;
    }
    let p = &candidate.params;
    let tol = SELF_CHECK_TOL * p.g_a.max(1.0);

    // Both exponents -(κ+Γ)/4 ± iΩ must be roots of λ² - tr λ + det.
    let decay = Complex64::new(-(p.kappa + p.gamma) / 4.0, 0.0);
    let exponents_ok = [decay + I * omega_r, decay - I * omega_r]
        .iter()
        .all(|&l| (l * l - trace * l + det).norm() <= tol * (1.0 + l.norm_sqr()));

    // C(0) = (1, 0) and the first derivative implied by the equations.
    let (e0, g0) = candidate.amplitudes(0.0);
    let initial_ok = (e0 - 1.0).norm() <= tol && g0.norm() <= tol;
    let weight = p.g_a / omega_r;
    let de0 = weight * (-omega_r * phi.sin() + decay * phi.cos());
    let slope_ok = (de0 - m[0][0]).norm() <= tol;

    exponents_ok && initial_ok && slope_ok
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: Complex64, b: Complex64, tol: f64) {
        assert!((a - b).norm() <= tol, "{a} vs {b}");
    }

    #[test]
    fn raman_resonance_closed_form() {
        let solution = solve_two_mode(&SystemParams::new(1.0, 0.1, 0.0, 0.0, 0.0)).unwrap();
        let w = 1.01f64.sqrt();
        for t in [0.0, 0.3, 1.7, 10.0, 55.5] {
            let [e, g, f] = solution.amplitudes(t);
            assert_close(e, Complex64::new((w * t).cos(), 0.0), 1e-12);
            assert_close(g, -I * (1.0 / w) * (w * t).sin(), 1e-12);
            assert_close(f, -I * (0.1 / w) * (w * t).sin(), 1e-12);
        }
    }

    #[test]
    fn lossless_residues_match_printed_prefactors() {
        for (ga, gb, dw) in [(1.0, 0.1, 1.0), (1.0, 0.1, 0.4), (0.8, 0.3, -1.3)] {
            let solution = solve_two_mode(&SystemParams::new(ga, gb, dw, 0.0, 0.0)).unwrap();
            let cubic = characteristic_cubic(&SystemParams::new(ga, gb, dw, 0.0, 0.0));
            let idw = Complex64::new(0.0, dw);
            for (n, &l) in solution.eigen.lambdas.iter().enumerate() {
                let d = ga * ga + gb * gb + (3.0 * l - 2.0 * idw) * l;
                assert!((d - cubic.derivative(l)).norm() <= 1e-10 * d.norm());
                let rel =
                    |a: Complex64, b: Complex64| (a - b).norm() <= 1e-10 * b.norm().max(1e-300);
                assert!(rel(solution.residues_e[n], (l - idw) * l / d));
                assert!(rel(solution.residues_f[n], -I * gb * l / d));
                assert!(rel(solution.residues_g[n], -I * ga * (l - idw) / d));
            }
        }
    }

    #[test]
    fn residues_satisfy_initial_state() {
        let solution = solve_two_mode(&SystemParams::new(1.0, 0.1, 1.0, 0.05, 0.07)).unwrap();
        let sum = |c: &[Complex64; 3]| -> Complex64 { c.iter().sum() };
        assert_close(sum(&solution.residues_e), Complex64::new(1.0, 0.0), 1e-10);
        assert_close(sum(&solution.residues_g), Complex64::new(0.0, 0.0), 1e-10);
        assert_close(sum(&solution.residues_f), Complex64::new(0.0, 0.0), 1e-10);
    }

    #[test]
    fn decoupled_b_mode_reduces_to_single_mode() {
        let solution = solve_two_mode(&SystemParams::new(1.0, 0.0, 0.5, 0.0, 0.0)).unwrap();
        for t in [0.0, 1.0, 2.5, 40.0] {
            let [e, g, f] = solution.amplitudes(t);
            assert_eq!(f, Complex64::new(0.0, 0.0));
            assert_close(e, Complex64::new(t.cos(), 0.0), 1e-12);
            assert_close(g, -I * t.sin(), 1e-12);
        }
    }

    #[test]
    fn exact_crossing_is_rejected() {
        let err = solve_two_mode(&SystemParams::new(1.0, 0.0, 1.0, 0.0, 0.0)).unwrap_err();
        assert_eq!(err, Error::DegenerateSpectrum);
        assert_eq!(err.to_string(), "degenerate spectrum: residue form invalid");
    }

    #[test]
    fn invalid_params_are_rejected() {
        assert!(matches!(
            solve_two_mode(&SystemParams::new(0.0, 0.1, 0.0, 0.0, 0.0)),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn quarter_period_occupations() {
        let solution = solve_two_mode(&SystemParams::new(1.0, 0.1, 0.0, 0.0, 0.0)).unwrap();
        let w = 1.01f64.sqrt();
        let s = sample_trajectory(&solution, &[0.0, std::f64::consts::PI / (2.0 * w)]);
        assert!((s[0].occ_e - 1.0).abs() < 1e-14 && s[0].occ_g < 1e-28 && s[0].occ_f < 1e-28);
        assert!((s[0].norm - 1.0).abs() < 1e-14);
        assert!(s[1].occ_e < 1e-20);
        assert!((s[1].occ_g - 1.0 / 1.01).abs() < 1e-12);
        assert!((s[1].occ_f - 0.01 / 1.01).abs() < 1e-12);
    }

    #[test]
    fn single_mode_lossless_rabi_oscillation() {
        let solution = solve_single_mode(&SingleModeParams::new(1.0, 0.0, 0.0, 0.0)).unwrap();
        assert!(solution.is_printed_form());
        for t in [0.0, 0.5, 3.0, 77.0] {
            let (e, g) = solution.amplitudes(t);
            assert_close(e, Complex64::new(t.cos(), 0.0), 1e-12);
            assert_close(g, -I * t.sin(), 1e-12);
        }
    }

    #[test]
    fn single_mode_resonant_lossy_uses_printed_form() {
        let solution = solve_single_mode(&SingleModeParams::new(1.0, 0.0, 0.05, 0.07)).unwrap();
        let SingleModeForm::Printed { omega_r, .. } = solution.form else {
            panic!("printed form should conform on resonance");
        };
        let expected = (1.0 - ((0.07f64 - 0.05) / 4.0).powi(2)).sqrt();
        assert!((omega_r.re - expected).abs() < 1e-15 && omega_r.im.abs() < 1e-15);
        assert!((omega_r.re - 0.9999875).abs() < 1e-7);
        // Occupations decay under the envelope exp(-(κ+Γ)t/2); φ is small so
        // the oscillating factor stays within a percent of one.
        for t in [10.0, 30.0, 75.0] {
            let (e, g) = solution.amplitudes(t);
            let scaled = (e.norm_sqr() + g.norm_sqr()) * (0.12 * t / 2.0).exp();
            assert!((scaled - 1.0).abs() < 0.02, "{scaled}");
        }
    }

    #[test]
    fn single_mode_detuned_falls_back_to_residue_form() {
        let solution = solve_single_mode(&SingleModeParams::new(1.0, 0.3, 0.02, 0.1)).unwrap();
        assert!(!solution.is_printed_form());
        let (e, g) = solution.amplitudes(0.0);
        assert_close(e, Complex64::new(1.0, 0.0), 1e-12);
        assert_close(g, Complex64::new(0.0, 0.0), 1e-12);
    }

    #[test]
    fn critical_damping_is_rejected() {
        // g = |κ - Γ|/4 on resonance makes Ω vanish.
        let err = solve_single_mode(&SingleModeParams::new(1.0, 0.0, 0.0, 4.0)).unwrap_err();
        assert_eq!(err, Error::DegenerateTwoLevel);
        assert_eq!(err.to_string(), "degenerate 2x2 spectrum");
    }

    #[test]
    fn overdamped_single_mode_still_solves() {
        let solution = solve_single_mode(&SingleModeParams::new(1.0, 0.0, 0.0, 10.0)).unwrap();
        let (e, _) = solution.amplitudes(0.0);
        assert_close(e, Complex64::new(1.0, 0.0), 1e-12);
    }
}
