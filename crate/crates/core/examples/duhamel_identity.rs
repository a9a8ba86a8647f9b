//! The pseudo-linearisation identity for a bump perturbation of the unit
//! square, the weighted cross-operator norm, and tracking of the doubly
//! degenerate first eigencluster.

use neumann_lab::bumps::bump_family;
use neumann_lab::perturbation::{
    b_coefficient, pseudo_linearisation_residual, resolvent_gap, track_cluster,
    weighted_opnorm_diff, SpectralPair,
};
use neumann_lab::{build_domain, eigensolve, DiffusivityField, DomainKind};

pub fn run_example() -> neumann_lab::Result<()> {
    let (_, grid) = build_domain(DomainKind::Rectangle, &[0.0, 1.0, 0.0, 1.0], 16, 0.25)?;
    let f0 = DiffusivityField::constant(&grid, 1.0)?;
    let es0 = eigensolve(&grid, &f0, grid.len())?;
    println!(
        "square, {} nodes: λ₁ = λ₂ = {:.5} (multiplicity {})",
        grid.len(),
        es0.eigenvalue(1),
        es0.multiplicity(1)
    );

    let lam = es0.eigenvalue(1);
    println!(
        "b(λ, λ, 0.1) = {:.6e} (coincident form D e^(-Dλ))",
        b_coefficient(lam, lam, 0.1)
    );
    println!("b(λ, 2λ, 0.1) = {:.6e}", b_coefficient(lam, 2.0 * lam, 0.1));

    for (amplitude, m) in [(0.3, 0usize), (0.05, 1)] {
        let members = bump_family(&grid, &f0, 2, amplitude, 0.5, 3)?;
        let f = &members[m].field;
        let es = eigensolve(&grid, f, grid.len())?;
        let pair = SpectralPair::new(&grid, f, &f0, &es, &es0)?;
        println!("amplitude {amplitude}:");
        for (d, k) in [(0.05, 1), (0.1, 2), (0.2, 3)] {
            let r = pseudo_linearisation_residual(&pair, d, k)?;
            println!(
                "  D = {d}, k = {k}: relative residual {:.2e} of ‖lhs‖ = {:.3e}",
                r.relative, r.lhs_norm
            );
        }
        println!(
            "  weighted operator norm at D = 0.1: {:.4e}",
            weighted_opnorm_diff(&pair, 0.1)?
        );
        let gap = resolvent_gap(&grid, &es, &es0)?;
        match track_cluster(&grid, &es, &es0, gap) {
            Ok(c) => println!(
                "  tracked cluster: multiplicity {}, overlap {:.4}, ‖E − e₁‖ = {:.3e}",
                c.multiplicity,
                c.overlap,
                c.l2_distance(&grid, &es0)
            ),
            Err(e) => println!("  tracking refused: {e}"),
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
