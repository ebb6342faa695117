use proptest::prelude::*;
use rarr_core::eigen::{eigenvalues, RESIDUAL_TOL};
use rarr_core::{characteristic_cubic, solve_cubic, sweep_eigenvalues, Complex64, SystemParams};

fn params() -> impl Strategy<Value = SystemParams> {
    (
        0.5f64..2.0,
        0.0f64..0.5,
        -5.0f64..5.0,
        0.0f64..0.3,
        0.0f64..0.3,
        any::<bool>(),
    )
        .prop_map(|(ga, gb_ratio, dw, gamma, kappa, lossless)| {
            let (gamma, kappa) = if lossless { (0.0, 0.0) } else { (gamma, kappa) };
            SystemParams::new(ga, gb_ratio * ga, dw, gamma, kappa)
        })
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

proptest! {
    #[test]
    fn roots_satisfy_cubic_and_vieta(p in params()) {
        let cubic = characteristic_cubic(&p);
        let triple = solve_cubic(&cubic).unwrap();
        let [a, b, c] = triple.lambdas;
        let scale = cubic.scale();
        for l in triple.lambdas {
            prop_assert!(cubic.eval(l).norm() <= RESIDUAL_TOL * scale);
        }
        let rel = |x: Complex64, y: Complex64| (x - y).norm() <= 1e-10 * y.norm().max(1.0);
        prop_assert!(rel(a + b + c, -cubic.c2));
        prop_assert!(rel(a * b + a * c + b * c, cubic.c1));
        prop_assert!(rel(a * b * c, -cubic.c0));
    }

    #[test]
    fn lossless_roots_are_imaginary_and_lossy_roots_decay(p in params()) {
        let triple = eigenvalues(&p).unwrap();
        for l in triple.lambdas {
            if p.is_lossless() {
                prop_assert!(l.re.abs() <= 1e-12, "{}", l);
            } else {
                prop_assert!(l.re <= 1e-14, "{}", l);
            }
        }
    }
}

#[test]
fn strong_coupling_damping_is_near_quarter_of_total_loss() {
    let target = -(0.05 + 0.07) / 4.0;
    for dw in grid(0.0, 3.0, 61) {
        let triple = eigenvalues(&SystemParams::new(1.0, 0.1, dw, 0.05, 0.07)).unwrap();
        for l in triple.lambdas {
            assert!(
                (l.re - target).abs() <= 0.2 * target.abs(),
                "δω = {dw}: {l}"
            );
        }
    }
}

#[test]
fn branch_labels_agree_across_resolutions() {
    let p = SystemParams::new(1.0, 0.1, 0.0, 0.0, 0.0);
    let coarse_grid = grid(0.0, 3.0, 301);
    let fine_grid = grid(0.0, 3.0, 1201);
    let coarse = sweep_eigenvalues(&p, &coarse_grid).unwrap();
    let fine = sweep_eigenvalues(&p, &fine_grid).unwrap();
    for (k, triple) in coarse.iter().enumerate() {
        let a = triple.by_branch();
        let b = fine[4 * k].by_branch();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-12, "grid point {k}");
        }
    }
    // Step sizes of each branch shrink with the grid spacing.
    let max_jump = |sweep: &[rarr_core::EigenTriple]| {
        sweep
            .windows(2)
            .flat_map(|w| {
                let (a, b) = (w[0].by_branch(), w[1].by_branch());
                (0..3).map(move |k| (a[k] - b[k]).norm())
            })
            .fold(0.0, f64::max)
    };
    assert!(max_jump(&fine) < 0.5 * max_jump(&coarse));
}

#[test]
fn far_detuned_limit_recovers_bare_rabi_frequency() {
    let triple = eigenvalues(&SystemParams::new(1.0, 0.1, 100.0, 0.0, 0.0)).unwrap();
    let [low, mid, high] = triple.lambdas;
    assert!((low.im + 1.0).abs() < 1e-3);
    assert!((mid.im - 1.0).abs() < 1e-3);
    assert!((high.im - 100.0).abs() < 1e-3);
}

#[test]
fn decoupled_b_mode_crosses_exactly() {
    let p = SystemParams::new(1.0, 0.0, 0.0, 0.0, 0.0);
    let sweep = sweep_eigenvalues(&p, &grid(0.0, 3.0, 600)).unwrap();
    // Off the crossing the spectrum is {-i, +i, iδω}.
    for (dw, triple) in grid(0.0, 3.0, 600).iter().zip(&sweep) {
        let mut ims: Vec<f64> = triple.lambdas.iter().map(|l| l.im).collect();
        let mut expected = vec![-1.0, 1.0, *dw];
        ims.sort_by(f64::total_cmp);
        expected.sort_by(f64::total_cmp);
        for (a, b) in ims.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }
    let at_crossing = eigenvalues(&p.with_delta_omega(1.0)).unwrap();
    assert!((at_crossing.lambdas[2] - at_crossing.lambdas[1]).norm() <= 1e-9);
}
