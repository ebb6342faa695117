//! Characteristic cubic of the three-amplitude system and its roots.
//!
//! The slowly varying amplitudes `(C_E, C_G, C_F)` obey `dC/dt = M C` with
//!
//! ```text
//!     | -Γ/2    -i g_a   -i g_b     |
//! M = | -i g_a  -κ/2      0         |
//!     | -i g_b   0        iδω - κ/2 |
//! ```
//!
//! and an exponential ansatz `exp(λt)` turns this into `det(λI - M) = 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::SystemParams;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Polishing iterations before a root is declared non-convergent.
pub const MAX_POLISH_ITERATIONS: usize = 50;
/// Residual bound `|p(λ)| <= RESIDUAL_TOL * scale` every returned root meets.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Roots closer than this (relative to the root scale) are flagged coincident.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Pairings within this total squared distance of each other are ambiguous.
pub const PAIRING_AMBIGUITY_TOL: f64 = 1e-9;

/// Roots closer than this are re-solved as a multiple root.
const CLUSTER_TOL: f64 = 1e-7;

pub type Matrix3 = [[Complex64; 3]; 3];

/// Coefficient matrix `M` of the amplitude system, ordered `(E, G, F)`.
pub fn amplitude_matrix(params: &SystemParams) -> Matrix3 {
    let zero = Complex64::new(0.0, 0.0);
    let ga = -I * params.g_a;
    let gb = -I * params.g_b;
    [
        [Complex64::new(-params.gamma / 2.0, 0.0), ga, gb],
        [ga, Complex64::new(-params.kappa / 2.0, 0.0), zero],
        [
            gb,
            zero,
            Complex64::new(-params.kappa / 2.0, params.delta_omega),
        ],
    ]
}

/// Monic cubic `λ³ + c2 λ² + c1 λ + c0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicCoefficients {
    pub c2: Complex64,
    pub c1: Complex64,
    pub c0: Complex64,
}

impl CubicCoefficients {
    pub fn new(c2: Complex64, c1: Complex64, c0: Complex64) -> Self {
        Self { c2, c1, c0 }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        ((z + self.c2) * z + self.c1) * z + self.c0
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        (3.0 * z + 2.0 * self.c2) * z + self.c1
    }

    /// `max(1, |c2|, |c1|, |c0|)`.
    pub fn scale(&self) -> f64 {
        [self.c2, self.c1, self.c0]
            .iter()
            .map(|c| c.norm())
            .fold(1.0, f64::max)
    }

    /// Residual bound applied to a root `z`. The `|z|³` term keeps the bound
    /// above the rounding floor of evaluating `p` at large roots.
    fn residual_bound(&self, z: Complex64) -> f64 {
        RESIDUAL_TOL * self.scale().max(z.norm().powi(3))
    }
}

/// `det(λI - M)` expanded through the invariants of `M`.
pub fn characteristic_cubic(params: &SystemParams) -> CubicCoefficients {
    let m = amplitude_matrix(params);
    let trace = m[0][0] + m[1][1] + m[2][2];
    let minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
        + m[1][1] * m[2][2]
        - m[1][2] * m[2][1];
    CubicCoefficients::new(-trace, minors, -determinant(&m))
}

pub(crate) fn determinant(m: &Matrix3) -> Complex64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Stable identifier of an eigenfrequency branch, numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BranchLabel(pub u8);

/// The three eigenfrequencies at one parameter point.
///
/// `lambdas` is sorted by ascending imaginary part; `branch_labels[k]` names
/// the branch `lambdas[k]` belongs to. Outside a sweep the labels coincide
/// with the sort order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenTriple {
    pub lambdas: [Complex64; 3],
    pub branch_labels: [BranchLabel; 3],
    /// Set when two roots coincide to within [`DEGENERACY_TOL`].
    pub degenerate: bool,
}

impl EigenTriple {
    /// Eigenvalue on branch `label`.
    pub fn branch(&self, label: BranchLabel) -> Complex64 {
        let k = self
            .branch_labels
            .iter()
            .position(|&l| l == label)
            .expect("branch label out of range");
        self.lambdas[k]
    }

    /// Eigenvalues ordered by branch label.
    pub fn by_branch(&self) -> [Complex64; 3] {
        [1, 2, 3].map(|l| self.branch(BranchLabel(l)))
    }

    pub fn min_separation(&self) -> f64 {
        let l = &self.lambdas;
        (l[0] - l[1])
            .norm()
            .min((l[0] - l[2]).norm())
            .min((l[1] - l[2]).norm())
    }
}

fn sort_by_imag(mut roots: [Complex64; 3]) -> [Complex64; 3] {
    roots.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    roots
}

/// Closed-form roots of the cubic via the depressed form `t³ + pt + q`.
fn cardano_seeds(c: &CubicCoefficients) -> [Complex64; 3] {
    let shift = c.c2 / 3.0;
    let p = c.c1 - c.c2 * shift;
    let q = 2.0 * shift * shift * shift - c.c1 * shift + c.c0;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let (u_plus, u_minus) = (-q / 2.0 + disc, -q / 2.0 - disc);
    let u3 = if u_plus.norm() >= u_minus.norm() {
        u_plus
    } else {
        u_minus
    };
    if u3.norm() == 0.0 {
        // p = q = 0: triple root.
        return [-shift; 3];
    }
    let u = u3.powf(1.0 / 3.0);
    let rot = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    let mut roots = [Complex64::new(0.0, 0.0); 3];
    let mut uk = u;
    for root in &mut roots {
        *root = uk - p / (3.0 * uk) - shift;
        uk *= rot;
    }
    roots
}

/// Newton refinement that only accepts steps lowering the residual.
fn newton<F, D>(f: F, df: D, seed: Complex64) -> Complex64
where
    F: Fn(Complex64) -> Complex64,
    D: Fn(Complex64) -> Complex64,
{
    let mut z = seed;
    let mut fz = f(z).norm();
    for _ in 0..MAX_POLISH_ITERATIONS {
        if fz == 0.0 {
            break;
        }
        let d = df(z);
        if d.norm() == 0.0 {
            break;
        }
        let next = z - f(z) / d;
        let f_next = f(next).norm();
        if !(f_next < fz) {
            break;
        }
        let moved = (next - z).norm();
        z = next;
        fz = f_next;
        if moved <= 4.0 * f64::EPSILON * z.norm().max(1.0) {
            break;
        }
    }
    z
}

/// Roots of a monic complex cubic, seeded in closed form and Newton-polished.
///
/// Clusters of nearly equal roots are re-solved as a multiple root through the
/// derivative, so a double root comes back as two numerically equal values.
pub fn solve_cubic(coeffs: &CubicCoefficients) -> Result<EigenTriple> {
    let c = *coeffs;
    let f = |z| c.eval(z);
    let df = |z| c.derivative(z);
    let mut roots = cardano_seeds(&c).map(|z| newton(f, df, z));

    let scale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let close = |a: Complex64, b: Complex64| (a - b).norm() < CLUSTER_TOL * scale;
    let all_close = close(roots[0], roots[1]) && close(roots[1], roots[2]);
    if all_close {
        let z = -c.c2 / 3.0;
        if c.eval(z).norm() <= c.residual_bound(z) {
            roots = [z; 3];
        }
    } else {
        'pairs: for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
            if close(roots[i], roots[j]) {
                let mid = (roots[i] + roots[j]) / 2.0;
                let second = |z: Complex64| 6.0 * z + 2.0 * c.c2;
                let z = newton(df, second, mid);
                if c.eval(z).norm() <= c.residual_bound(z) {
                    roots[i] = z;
                    roots[j] = z;
                    roots[k] = newton(f, df, -c.c2 - 2.0 * z);
                }
                break 'pairs;
            }
        }
    }

    for &z in &roots {
        let residual = c.eval(z).norm();
        if !(residual <= c.residual_bound(z)) {
            return Err(Error::NoConvergence {
                iterations: MAX_POLISH_ITERATIONS,
                residual,
            });
        }
    }

    let lambdas = sort_by_imag(roots);
    let mut triple = EigenTriple {
        lambdas,
        branch_labels: [BranchLabel(1), BranchLabel(2), BranchLabel(3)],
        degenerate: false,
    };
    triple.degenerate = triple.min_separation() < DEGENERACY_TOL * scale;
    Ok(triple)
}

/// Eigenfrequencies of the amplitude system for one parameter set.
pub fn eigenvalues(params: &SystemParams) -> Result<EigenTriple> {
    solve_cubic(&characteristic_cubic(params))
}

const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

fn check_monotone(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidGrid("grid values must be finite".into()));
    }
    let increasing = grid.windows(2).all(|w| w[1] > w[0]);
    let decreasing = grid.windows(2).all(|w| w[1] < w[0]);
    if increasing || decreasing {
        Ok(())
    } else {
        Err(Error::InvalidGrid("grid must be strictly monotone".into()))
    }
}

/// Eigenfrequencies along a detuning grid with continuation-stable labels.
///
/// The first point is labelled by ascending imaginary part. Each following
/// point takes the assignment of roots to branches minimizing the total
/// squared distance to the previous point's branch values.
pub fn sweep_eigenvalues(params: &SystemParams, detuning_grid: &[f64]) -> Result<Vec<EigenTriple>> {
    check_monotone(detuning_grid)?;
    let mut triples = detuning_grid
        .par_iter()
        .map(|&dw| eigenvalues(&params.with_delta_omega(dw)))
        .collect::<Result<Vec<_>>>()?;

    for index in 1..triples.len() {
        let previous = triples[index - 1].by_branch();
        let current = triples[index].lambdas;
        let cost = |perm: &[usize; 3]| -> f64 {
            (0..3)
                .map(|b| (current[perm[b]] - previous[b]).norm_sqr())
                .sum()
        };
        let mut ranked: Vec<(f64, &[usize; 3])> =
            PERMUTATIONS.iter().map(|p| (cost(p), p)).collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (best_cost, best) = ranked[0];
        let (runner_cost, runner) = ranked[1];
        let same_values =
            (0..3).all(|b| (current[best[b]] - current[runner[b]]).norm() <= PAIRING_AMBIGUITY_TOL);
        if runner_cost - best_cost < PAIRING_AMBIGUITY_TOL && !same_values {
            return Err(Error::AmbiguousPairing {
                index,
                delta_omega: detuning_grid[index],
            });
        }
        let mut labels = [BranchLabel(0); 3];
        for (b, &k) in best.iter().enumerate() {
            labels[k] = BranchLabel(b as u8 + 1);
        }
        triples[index].branch_labels = labels;
    }
    Ok(triples)
}
