use std::f64::consts::PI;

use neumann_lab::sim::{
    estimate_transition, ks_critical_1pct, ks_uniform, population_transition, reflect, simulate,
    true_transition, weighted_estimation_error, Interpolator, SimConfig,
};
use neumann_lab::spectral::transition_density;
use neumann_lab::{build_domain, eigensolve, DiffusivityField, DomainKind};
use proptest::prelude::*;

#[test]
fn population_limit_is_the_diagonal_semigroup() {
    let (_, grid) = build_domain(DomainKind::Interval, &[0.0, 1.0], 128, 0.2).unwrap();
    let f = DiffusivityField::constant(&grid, 1.0).unwrap();
    let es = eigensolve(&grid, &f, grid.len()).unwrap();
    let d = 0.5;
    let density = transition_density(&grid, &es, d).unwrap();
    let pop = population_transition(&grid, &density, &es, 4).unwrap();
    let truth = true_transition(&grid, &es, &es, 4, d).unwrap();
    for l in 0..=4 {
        for k in 0..=4 {
            let want = if l == k {
                (-d * es.eigenvalue(k)).exp()
            } else {
                0.0
            };
            assert!((pop[(l, k)] - want).abs() < 1e-12, "({l}, {k})");
            assert!((truth[(l, k)] - want).abs() < 1e-12);
        }
    }
    assert!((truth[(1, 1)] / (-0.5 * PI * PI).exp() - 1.0).abs() < 1e-3);
    assert_eq!(weighted_estimation_error(&truth, &truth, &es).unwrap(), 0.0);
}

#[test]
fn simulated_chain_is_stationary_and_recovers_the_first_mode() {
    let (_, grid) = build_domain(DomainKind::Interval, &[0.0, 1.0], 128, 0.2).unwrap();
    let f = DiffusivityField::constant(&grid, 1.0).unwrap();
    let es = eigensolve(&grid, &f, grid.len()).unwrap();
    let cfg = SimConfig {
        d_time: 0.5,
        n_obs: 3000,
        dt: 0.01,
        seed: 31,
    };
    let sample = simulate(&grid, &f, cfg).unwrap();
    assert_eq!(sample.transitions(), 3000);
    assert!(sample.positions.iter().all(|p| (0.0..=1.0).contains(&p[0])));
    let xs: Vec<f64> = sample.positions.iter().map(|p| p[0]).collect();
    assert!(ks_uniform(&xs, 0.0, 1.0) <= ks_critical_1pct(xs.len()));
    let est = estimate_transition(&grid, &sample, &es, 2).unwrap();
    let truth = (-0.5 * es.eigenvalue(1)).exp();
    assert!((est.entries[(1, 1)] - truth).abs() <= 4.0 * est.standard_errors[(1, 1)]);
    assert!((est.entries[(0, 0)] - 1.0).abs() < 1e-12);
    assert_eq!(simulate(&grid, &f, cfg).unwrap(), sample);
}

#[test]
fn coarse_steps_are_rejected() {
    let (_, grid) = build_domain(DomainKind::Interval, &[0.0, 1.0], 64, 0.2).unwrap();
    let f = DiffusivityField::constant(&grid, 1.0).unwrap();
    let cfg = SimConfig {
        d_time: 0.1,
        n_obs: 10,
        dt: 0.01,
        seed: 0,
    };
    assert!(simulate(&grid, &f, cfg).is_err());
}

#[test]
fn ks_statistic_of_an_exact_grid_of_quantiles() {
    let n = 1000;
    let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
    assert!((ks_uniform(&xs, 0.0, 1.0) - 0.5 / n as f64).abs() < 1e-12);
    assert!((ks_critical_1pct(10_000) - 0.0163).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn reflection_lands_in_the_box_and_fixes_interior_points(x in -0.9f64..1.9, y in -0.9f64..1.9) {
        let (d, _) = build_domain(DomainKind::Rectangle, &[0.0, 1.0, 0.0, 1.0], 16, 0.25).unwrap();
        let q = reflect([x, y], &d).unwrap();
        prop_assert!(d.contains(q));
        if d.contains([x, y]) {
            prop_assert_eq!(q, [x, y]);
        } else {
            // Folding preserves the distance to the nearest lattice of mirror images.
            for axis in 0..2 {
                let v = [x, y][axis];
                let folded = if v < 0.0 { -v } else if v > 1.0 { 2.0 - v } else { v };
                prop_assert!((q[axis] - folded).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn radial_reflection_keeps_the_angle(r in 0.0f64..2.9, theta in 0.0f64..std::f64::consts::TAU) {
        let (d, _) = build_domain(DomainKind::Disk, &[1.0], 16, 0.25).unwrap();
        let p = [r * theta.cos(), r * theta.sin()];
        let q = reflect(p, &d).unwrap();
        prop_assert!(q[0].hypot(q[1]) <= 1.0 + 1e-12);
        if r > 1e-9 {
            let cross = p[0] * q[1] - p[1] * q[0];
            prop_assert!(cross.abs() < 1e-9);
        }
    }

    #[test]
    fn interpolation_reproduces_affine_functions(x in 0.0f64..1.0, y in 0.0f64..1.0, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let (_, grid) = build_domain(DomainKind::Rectangle, &[0.0, 1.0, 0.0, 1.0], 16, 0.25).unwrap();
        let interp = Interpolator::new(&grid).unwrap();
        let values: Vec<f64> = grid.nodes().iter().map(|p| 1.0 + a * p[0] + b * p[1]).collect();
        let st = interp.stencil([x, y]);
        prop_assert!((st.iter().map(|s| s.1).sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!((interp.eval(&values, [x, y]) - (1.0 + a * x + b * y)).abs() < 1e-12);
    }
}
