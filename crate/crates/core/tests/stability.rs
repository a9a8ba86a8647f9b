use std::f64::consts::PI;

use neumann_lab::bumps::bump_family;
use neumann_lab::stability::{
    chain_rule_audit, cutoff_tail_profile, gradient_floor, l1_transport_bound, lipschitz_constant,
    stability_probe, FloorMode,
};
use neumann_lab::{build_domain, eigensolve, DiffusivityField, DomainKind, Grid};
use proptest::prelude::*;

fn interval(n: usize, margin: f64) -> Grid {
    build_domain(DomainKind::Interval, &[0.0, 1.0], n, margin)
        .unwrap()
        .1
}

#[test]
fn empirical_floor_matches_the_first_cosine_mode() {
    let grid = interval(256, 0.2);
    let f0 = DiffusivityField::constant(&grid, 1.0).unwrap();
    let es = eigensolve(&grid, &f0, grid.len()).unwrap();
    let cert = gradient_floor(&grid, &es, FloorMode::Empirical).unwrap();
    assert_eq!(cert.kappa, 1);
    // |∇(√2 cos πx)|² = 2π² sin²(πx), smallest at the edge of the inner set.
    let oracle = grid
        .nodes()
        .iter()
        .zip(grid.inner_mask())
        .filter(|(_, &m)| m)
        .map(|(p, _)| 2.0 * PI * PI * (PI * p[0]).sin().powi(2))
        .fold(f64::INFINITY, f64::min);
    assert!(
        (cert.floor / oracle - 1.0).abs() < 1e-3,
        "{} vs {oracle}",
        cert.floor
    );
}

#[test]
fn constructive_certificate_needs_at_least_the_empirical_truncation() {
    let grid = interval(128, 0.2);
    let f0 = DiffusivityField::constant(&grid, 1.0).unwrap();
    let es = eigensolve(&grid, &f0, grid.len()).unwrap();
    let emp = gradient_floor(&grid, &es, FloorMode::Empirical).unwrap();
    let con = gradient_floor(&grid, &es, FloorMode::Constructive).unwrap();
    assert!(con.kappa >= emp.kappa);
    emp.validate(&grid, &es).unwrap();
    con.validate(&grid, &es).unwrap();
    let w = con.witness.as_ref().unwrap();
    assert!(w.tail_c1 <= 0.5);
    assert!((con.floor - 1.0 / (4.0 * w.phi_l2 * w.phi_l2)).abs() < 1e-15);
    let (_, profile) = cutoff_tail_profile(&grid, &es, con.kappa).unwrap();
    assert!(profile[..con.kappa - 1].iter().all(|&t| t > 0.5));
    let mean: f64 = w
        .phi
        .values()
        .iter()
        .zip(grid.weights())
        .map(|(a, b)| a * b)
        .sum();
    assert!(mean.abs() < 1e-13);
}

#[test]
fn certificates_reject_foreign_eigensystems() {
    let grid = interval(64, 0.2);
    let f0 = DiffusivityField::constant(&grid, 1.0).unwrap();
    let es = eigensolve(&grid, &f0, grid.len()).unwrap();
    let cert = gradient_floor(&grid, &es, FloorMode::Empirical).unwrap();
    let stiff = DiffusivityField::constant(&grid, 0.5).unwrap();
    let es_half = eigensolve(&grid, &stiff, grid.len()).unwrap();
    // Same eigenfunctions, so the floor still holds; a truncated system does not certify.
    cert.validate(&grid, &es_half).unwrap();
    let con = gradient_floor(&grid, &es, FloorMode::Constructive).unwrap();
    let short = eigensolve(&grid, &f0, con.kappa).unwrap();
    assert!(con.validate(&grid, &short).is_err());
}

#[test]
fn transport_bound_and_probe_on_a_small_family() {
    let grid = interval(96, 0.2);
    let f0 = DiffusivityField::constant(&grid, 1.0).unwrap();
    let es0 = eigensolve(&grid, &f0, grid.len()).unwrap();
    let cert = gradient_floor(&grid, &es0, FloorMode::Empirical).unwrap();
    let members = bump_family(&grid, &f0, 10, 0.3, 0.5, 17).unwrap();
    for m in &members {
        let h = m.field.field().sub(f0.field()).unwrap();
        assert!(l1_transport_bound(&grid, &h, &es0, &cert).unwrap().holds());
    }
    let rows = stability_probe(&grid, &f0, &es0, &members, 0.3, 0.1, &cert).unwrap();
    assert_eq!(rows.len(), members.len());
    let lip = lipschitz_constant(&rows);
    assert!(lip.is_finite() && lip > 0.0);
    assert_eq!(
        lip,
        rows.iter()
            .map(|r| r.l1_distance / r.opnorm)
            .fold(0.0, f64::max)
    );
}

#[test]
fn transport_bound_requires_a_vanishing_boundary_trace() {
    let grid = interval(64, 0.2);
    let f0 = DiffusivityField::constant(&grid, 1.0).unwrap();
    let es0 = eigensolve(&grid, &f0, grid.len()).unwrap();
    let cert = gradient_floor(&grid, &es0, FloorMode::Empirical).unwrap();
    let h = grid.constant(0.1);
    assert!(l1_transport_bound(&grid, &h, &es0, &cert).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn chain_rule_never_increases_the_divergence(
        amps in prop::collection::vec(-1.0f64..1.0, 4),
        k in 1usize..4,
    ) {
        let (_, grid) = build_domain(DomainKind::Rectangle, &[0.0, 1.0, 0.0, 1.0], 20, 0.25).unwrap();
        let f0 = DiffusivityField::constant(&grid, 1.0).unwrap();
        let es = eigensolve(&grid, &f0, 8).unwrap();
        let h: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|p| {
                let s = (PI * p[0]).sin() * (PI * p[1]).sin();
                s * (amps[0] + amps[1] * (3.0 * p[0]).cos() + amps[2] * (5.0 * p[1]).sin() + amps[3] * p[0] * p[1])
            })
            .collect();
        let r = chain_rule_audit(&grid, &h, &grid.gradient(es.mode(k)));
        prop_assert_eq!(r.violations, 0);
        prop_assert_eq!(r.evaluated + r.excluded, grid.len());
    }

    #[test]
    fn nonnegative_perturbations_have_equal_divergences(seed in 0u64..500) {
        let grid = interval(64, 0.2);
        let f0 = DiffusivityField::constant(&grid, 1.0).unwrap();
        let es = eigensolve(&grid, &f0, 6).unwrap();
        let m = bump_family(&grid, &f0, 1, 0.3, 0.5, seed).unwrap().remove(0);
        let h: Vec<f64> = m.bumps.iter().fold(vec![0.0; grid.len()], |mut acc, b| {
            for (a, p) in acc.iter_mut().zip(grid.nodes()) {
                *a += b.eval(*p).abs();
            }
            acc
        });
        let r = chain_rule_audit(&grid, &h, &grid.gradient(es.mode(1)));
        prop_assert_eq!(r.violations, 0);
        prop_assert!((r.abs_norm - r.signed_norm).abs() <= 1e-12 * (1.0 + r.signed_norm));
    }
}
