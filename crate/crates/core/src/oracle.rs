//! Reference integrator for the amplitude equations.
//!
//! A Dormand-Prince 5(4) pair with step-size control and the pair's
//! continuous extension for dense output. Nothing here touches the
//! eigenvalue or residue code, so agreement between the two is a real check.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{SingleModeParams, SystemParams};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Linear amplitude system `dC/dt = M C` started in the excited state.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeSystem {
    dimension: usize,
    /// Row-major `dimension × dimension`.
    matrix: Vec<Complex64>,
    initial_state: Vec<Complex64>,
}

impl OdeSystem {
    fn from_rows<const N: usize>(rows: [[Complex64; N]; N]) -> Self {
        let mut initial_state = vec![Complex64::new(0.0, 0.0); N];
        initial_state[0] = Complex64::new(1.0, 0.0);
        Self {
            dimension: N,
            matrix: rows.iter().flatten().copied().collect(),
            initial_state,
        }
    }

    /// `(C_E, C_G, C_F)` of the two-mode cavity.
    pub fn two_mode(p: &SystemParams) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        let half_gamma = Complex64::new(p.gamma / 2.0, 0.0);
        let half_kappa = Complex64::new(p.kappa / 2.0, 0.0);
        Self::from_rows([
            [-half_gamma, -I * p.g_a, -I * p.g_b],
            [-I * p.g_a, -half_kappa, zero],
            [-I * p.g_b, zero, I * p.delta_omega - half_kappa],
        ])
    }

    /// `(C_E, C_G)` of the one-mode cavity, constant-coefficient frame.
    pub fn single_mode(p: &SingleModeParams) -> Self {
        Self::from_rows([
            [Complex64::new(-p.gamma / 2.0, 0.0), -I * p.g_a],
            [
                -I * p.g_a,
                Complex64::new(-p.kappa / 2.0, 0.0) - I * p.delta_omega_a,
            ],
        ])
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.dimension + col]
    }

    pub fn initial_state(&self) -> &[Complex64] {
        &self.initial_state
    }

    /// Frobenius norm of `M + M†`; zero exactly when `M = -iH` with `H` Hermitian.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dimension;
        let mut sum = 0.0;
        for r in 0..n {
            for c in 0..n {
                sum += (self.entry(r, c) + self.entry(c, r).conj()).norm_sqr();
            }
        }
        sum.sqrt()
    }

    pub fn apply(&self, y: &[Complex64], out: &mut [Complex64]) {
        let n = self.dimension;
        for (r, o) in out.iter_mut().enumerate().take(n) {
            *o = (0..n).map(|c| self.matrix[r * n + c] * y[c]).sum();
        }
    }
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Continuous extension.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

/// Adaptive Dormand-Prince integrator over complex state vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    /// When set, a step of length `h` may only commit `h / horizon` of the
    /// tolerance (error per unit step), so the tolerance bounds the
    /// accumulated error over the horizon rather than each step's.
    pub horizon: Option<f64>,
    pub max_steps: usize,
}

impl Dopri5 {
    /// Error-per-step control.
    pub fn new(tolerance: f64) -> Self {
        Self {
            rtol: tolerance,
            atol: tolerance,
            horizon: None,
            max_steps: 50_000_000,
        }
    }

    /// Error-per-unit-step control over `[0, horizon]`.
    pub fn global(tolerance: f64, horizon: f64) -> Self {
        Self {
            horizon: Some(horizon),
            ..Self::new(tolerance)
        }
    }

    /// Integrates `dy/dt = rhs(t, y)` from `0` to `t_end`, returning the final
    /// state. `on_step` sees every accepted step.
    pub fn run<F, S>(
        &self,
        mut rhs: F,
        y0: &[Complex64],
        t_end: f64,
        mut on_step: S,
    ) -> Result<Vec<Complex64>>
    where
        F: FnMut(f64, &[Complex64], &mut [Complex64]),
        S: FnMut(&StepRecord<'_>),
    {
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(Error::InvalidIntegration(format!(
                "t_end must be positive, got {t_end}"
            )));
        }
        let n = y0.len();
        let zero = Complex64::new(0.0, 0.0);
        let mut k = vec![vec![zero; n]; 7];
        let mut y = y0.to_vec();
        let mut y_new = vec![zero; n];
        let mut stage = vec![zero; n];

        rhs(0.0, &y, &mut k[0]);
        let mut t = 0.0;
        let mut h = self.initial_step(&y, &k[0], t_end);
        let mut steps = 0;
        while t < t_end {
            if steps >= self.max_steps {
                return Err(Error::StepSizeUnderflow { t });
            }
            let last = t + h >= t_end;
            if last {
                h = t_end - t;
            }
            if h <= 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { t });
            }

            let combos: [(f64, &[(usize, f64)]); 6] = [
                (C2, &[(0, A21)]),
                (C3, &[(0, A31), (1, A32)]),
                (C4, &[(0, A41), (1, A42), (2, A43)]),
                (C5, &[(0, A51), (1, A52), (2, A53), (3, A54)]),
                (1.0, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]),
                (1.0, &[(0, A71), (2, A73), (3, A74), (4, A75), (5, A76)]),
            ];
            for (s, (c, row)) in combos.iter().enumerate() {
                for i in 0..n {
                    let mut acc = zero;
                    for &(j, a) in row.iter() {
                        acc += k[j][i] * a;
                    }
                    stage[i] = y[i] + acc * h;
                }
                if s == 5 {
                    y_new.copy_from_slice(&stage);
                }
                let (_, rest) = k.split_at_mut(s + 1);
                rhs(t + c * h, &stage, &mut rest[0]);
            }

            let budget = self.horizon.map_or(1.0, |span| h / span);
            let mut err_sq = 0.0;
            for i in 0..n {
                let e = (k[0][i] * E1
                    + k[2][i] * E3
                    + k[3][i] * E4
                    + k[4][i] * E5
                    + k[5][i] * E6
                    + k[6][i] * E7)
                    * h;
                let sc = budget * (self.atol + self.rtol * y[i].norm().max(y_new[i].norm()));
                err_sq += (e.norm() / sc).powi(2);
            }
            let err = (err_sq / n as f64).sqrt();
            let err = if err.is_nan() { f64::INFINITY } else { err };

            if err <= 1.0 {
                on_step(&StepRecord {
                    t0: t,
                    h,
                    y0: &y,
                    y1: &y_new,
                    k: &k,
                });
                t = if last { t_end } else { t + h };
                y.copy_from_slice(&y_new);
                let (first, rest) = k.split_at_mut(1);
                first[0].copy_from_slice(&rest[5]);
                steps += 1;
            }
            let factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err.powf(-self.controller_exponent())).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            h *= if err <= 1.0 { factor } else { factor.min(1.0) };
        }
        Ok(y)
    }

    fn controller_exponent(&self) -> f64 {
        if self.horizon.is_some() {
            0.25
        } else {
            0.2
        }
    }

    fn initial_step(&self, y: &[Complex64], f: &[Complex64], t_end: f64) -> f64 {
        let scale = |i: usize| self.atol + self.rtol * y[i].norm();
        let n = y.len() as f64;
        let d0 = (y
            .iter()
            .enumerate()
            .map(|(i, v)| (v.norm() / scale(i)).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        let d1 = (f
            .iter()
            .enumerate()
            .map(|(i, v)| (v.norm() / scale(i)).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        let h = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h.min(t_end)
    }
}

/// One accepted step as seen by [`Dopri5::run`] observers.
pub struct StepRecord<'a> {
    pub t0: f64,
    pub h: f64,
    pub y0: &'a [Complex64],
    pub y1: &'a [Complex64],
    k: &'a [Vec<Complex64>],
}

impl StepRecord<'_> {
    fn dense_coefficients(&self) -> DenseStep {
        let n = self.y0.len();
        let h = self.h;
        let k = self.k;
        let mut coeffs = Vec::with_capacity(5 * n);
        let diff: Vec<Complex64> = (0..n).map(|i| self.y1[i] - self.y0[i]).collect();
        let bspl: Vec<Complex64> = (0..n).map(|i| k[0][i] * h - diff[i]).collect();
        coeffs.extend_from_slice(self.y0);
        coeffs.extend_from_slice(&diff);
        coeffs.extend_from_slice(&bspl);
        coeffs.extend((0..n).map(|i| diff[i] - k[6][i] * h - bspl[i]));
        coeffs.extend((0..n).map(|i| {
            (k[0][i] * D1
                + k[2][i] * D3
                + k[3][i] * D4
                + k[4][i] * D5
                + k[5][i] * D6
                + k[6][i] * D7)
                * h
        }));
        DenseStep {
            t0: self.t0,
            h,
            coeffs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct DenseStep {
    t0: f64,
    h: f64,
    coeffs: Vec<Complex64>,
}

/// Dense-output trajectory, evaluable anywhere in `[0, t_end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTrajectory {
    dimension: usize,
    steps: Vec<DenseStep>,
    final_state: Vec<Complex64>,
}

impl DenseTrajectory {
    pub fn t_end(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.t0 + s.h)
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    pub fn final_state(&self) -> &[Complex64] {
        &self.final_state
    }

    /// State at `t`, clamped into the integrated interval.
    pub fn eval(&self, t: f64) -> Vec<Complex64> {
        let idx = self
            .steps
            .partition_point(|s| s.t0 + s.h < t)
            .min(self.steps.len() - 1);
        let step = &self.steps[idx];
        let n = self.dimension;
        let theta = ((t - step.t0) / step.h).clamp(0.0, 1.0);
        let theta1 = 1.0 - theta;
        let r = |j: usize, i: usize| step.coeffs[j * n + i];
        (0..n)
            .map(|i| {
                r(0, i)
                    + (r(1, i) + (r(2, i) + (r(3, i) + r(4, i) * theta1) * theta) * theta1) * theta
            })
            .collect()
    }
}

/// Adaptive integration of `system` over `[0, t_end]` with dense output.
///
/// `tolerance` targets the accumulated error over the whole interval.
pub fn integrate(system: &OdeSystem, t_end: f64, tolerance: f64) -> Result<DenseTrajectory> {
    if !(1e-14..=1e-6).contains(&tolerance) {
        return Err(Error::InvalidIntegration(format!(
            "tolerance must lie in [1e-14, 1e-6], got {tolerance}"
        )));
    }
    let mut steps = Vec::new();
    let final_state = Dopri5::global(tolerance, t_end).run(
        |_, y, dy| system.apply(y, dy),
        system.initial_state(),
        t_end,
        |record| steps.push(record.dense_coefficients()),
    )?;
    Ok(DenseTrajectory {
        dimension: system.dimension(),
        steps,
        final_state,
    })
}

/// Fixed-step Dormand-Prince (fifth-order solution), no error control.
pub fn integrate_fixed_step(
    system: &OdeSystem,
    t_end: f64,
    steps: usize,
) -> Result<Vec<Complex64>> {
    if steps == 0 || !(t_end > 0.0) {
        return Err(Error::InvalidIntegration(
            "need t_end > 0 and at least one step".into(),
        ));
    }
    let h = t_end / steps as f64;
    let n = system.dimension();
    let zero = Complex64::new(0.0, 0.0);
    let rows: [&[(usize, f64)]; 5] = [
        &[(0, A21)],
        &[(0, A31), (1, A32)],
        &[(0, A41), (1, A42), (2, A43)],
        &[(0, A51), (1, A52), (2, A53), (3, A54)],
        &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)],
    ];
    let mut y = system.initial_state().to_vec();
    let mut k = vec![vec![zero; n]; 6];
    let mut stage = vec![zero; n];
    for _ in 0..steps {
        system.apply(&y, &mut k[0]);
        for (s, row) in rows.iter().enumerate() {
            for i in 0..n {
                stage[i] = y[i] + row.iter().map(|&(j, a)| k[j][i] * a).sum::<Complex64>() * h;
            }
            let (_, rest) = k.split_at_mut(s + 1);
            system.apply(&stage, &mut rest[0]);
        }
        for i in 0..n {
            y[i] +=
                (k[0][i] * A71 + k[2][i] * A73 + k[3][i] * A74 + k[4][i] * A75 + k[5][i] * A76) * h;
        }
    }
    Ok(y)
}

/// Truncated one-sided transforms `∫₀ᵀ C_K(t) e^{iΔt} dt` for each detuning,
/// integrated alongside the amplitudes as extra state components.
///
/// The truncated double integral `∫₀ᵀ∫₀ᵀ C_K*(t) C_K(t') e^{-iΔ(t-t')} dt dt'`
/// over the square is the squared modulus of this transform.
pub fn truncated_transforms(
    system: &OdeSystem,
    component: usize,
    detunings: &[f64],
    t_end: f64,
    tolerance: f64,
) -> Result<Vec<Complex64>> {
    if component >= system.dimension() {
        return Err(Error::InvalidIntegration(format!(
            "no component {component}"
        )));
    }
    let n = system.dimension();
    let mut y0 = system.initial_state().to_vec();
    y0.extend(std::iter::repeat_n(
        Complex64::new(0.0, 0.0),
        detunings.len(),
    ));
    let final_state = Dopri5::global(tolerance, t_end).run(
        |t, y, dy| {
            system.apply(&y[..n], &mut dy[..n]);
            for (j, &d) in detunings.iter().enumerate() {
                dy[n + j] = y[component] * Complex64::from_polar(1.0, d * t);
            }
        },
        &y0,
        t_end,
        |_| {},
    )?;
    Ok(final_state[n..].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn norm_sq(y: &[Complex64]) -> f64 {
        y.iter().map(|c| c.norm_sqr()).sum()
    }

    #[test]
    fn resonant_two_level_quarter_period() {
        let system = OdeSystem::single_mode(&SingleModeParams::new(1.0, 0.0, 0.0, 0.0));
        let traj = integrate(&system, PI / 2.0, 1e-12).unwrap();
        let y = traj.eval(PI / 2.0);
        assert!(y[0].norm() < 1e-10);
        assert!((y[1] - Complex64::new(0.0, -1.0)).norm() < 1e-10);
        // Dense output between steps.
        for t in [0.1, 0.77, 1.3] {
            let y = traj.eval(t);
            assert!((y[0] - Complex64::new(f64::cos(t), 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn raman_resonance_amplitude_ratio() {
        let system = OdeSystem::two_mode(&SystemParams::new(1.0, 0.1, 0.0, 0.0, 0.0));
        let traj = integrate(&system, 20.0, 1e-12).unwrap();
        for t in [0.5, 2.0, 7.3, 19.0] {
            let y = traj.eval(t);
            let ratio = y[2] / y[1];
            assert!((ratio - Complex64::new(0.1, 0.0)).norm() < 1e-9, "{ratio}");
        }
    }

    #[test]
    fn lossless_matrix_is_anti_hermitian() {
        let lossless = OdeSystem::two_mode(&SystemParams::new(1.0, 0.1, 1.3, 0.0, 0.0));
        assert!(lossless.hermiticity_defect() <= 1e-12);
        let lossy = OdeSystem::two_mode(&SystemParams::new(1.0, 0.1, 1.3, 0.05, 0.07));
        assert!(lossy.hermiticity_defect() > 0.05);
        let single = OdeSystem::single_mode(&SingleModeParams::new(1.0, 0.4, 0.0, 0.0));
        assert!(single.hermiticity_defect() <= 1e-12);
    }

    #[test]
    fn lossless_norm_drift_stays_within_ten_tolerances() {
        for tol in [1e-6, 1e-8, 1e-10, 1e-12, 1e-14] {
            let system = OdeSystem::two_mode(&SystemParams::new(1.0, 0.1, 1.0, 0.0, 0.0));
            let traj = integrate(&system, 100.0, tol).unwrap();
            let worst = (0..=1000)
                .map(|k| (norm_sq(&traj.eval(k as f64 * 0.1)) - 1.0).abs())
                .fold(0.0, f64::max);
            assert!(worst <= 10.0 * tol, "tol {tol}: drift {worst}");
        }
    }

    #[test]
    fn tolerance_range_is_enforced() {
        let system = OdeSystem::single_mode(&SingleModeParams::new(1.0, 0.0, 0.0, 0.0));
        assert!(integrate(&system, 1.0, 1e-5).is_err());
        assert!(integrate(&system, 1.0, 1e-15).is_err());
        assert!(integrate(&system, 0.0, 1e-10).is_err());
    }

    #[test]
    fn self_convergence_over_three_decades() {
        let system = OdeSystem::two_mode(&SystemParams::new(1.0, 0.1, 1.0, 0.05, 0.07));
        let reference = integrate(&system, 50.0, 1e-13).unwrap();
        let discrepancy = |tol: f64| {
            let traj = integrate(&system, 50.0, tol).unwrap();
            (0..=500)
                .map(|k| {
                    let t = k as f64 * 0.1;
                    traj.eval(t)
                        .iter()
                        .zip(reference.eval(t))
                        .map(|(a, b)| (a - b).norm())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max)
        };
        let errors: Vec<f64> = [1e-7, 1e-8, 1e-9, 1e-10]
            .iter()
            .map(|&t| discrepancy(t))
            .collect();
        for w in errors.windows(2) {
            assert!(w[1] < w[0], "{errors:?}");
        }
    }

    #[test]
    fn fixed_step_order_is_at_least_four() {
        let system = OdeSystem::single_mode(&SingleModeParams::new(1.0, 0.0, 0.0, 0.0));
        let t_end = 10.0;
        let error = |steps: usize| {
            let y = integrate_fixed_step(&system, t_end, steps).unwrap();
            (y[0] - Complex64::new(t_end.cos(), 0.0))
                .norm()
                .max((y[1] + I * t_end.sin()).norm())
        };
        let (coarse, fine) = (error(50), error(100));
        let order = (coarse / fine).log2();
        assert!(order >= 4.0, "observed order {order}");
    }

    #[test]
    fn underflow_is_reported() {
        // A violently growing mode drives the step size to nothing.
        let system = OdeSystem::from_rows([[Complex64::new(1e300, 0.0)]]);
        let err = integrate(&system, 1.0, 1e-10).unwrap_err();
        assert!(matches!(err, Error::StepSizeUnderflow { .. }));
    }
}
