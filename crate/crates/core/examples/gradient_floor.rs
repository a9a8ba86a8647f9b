//! Gradient floor certificates on the inner set, both the empirical search
//! and the cut-off construction, followed by the transport bound they feed.

use neumann_lab::bumps::bump_family;
use neumann_lab::stability::{chain_rule_audit, gradient_floor, l1_transport_bound, FloorMode};
use neumann_lab::{build_domain, eigensolve, DiffusivityField, DomainKind};

pub fn run_example() -> neumann_lab::Result<()> {
    for (kind, extents, resolution, margin) in [
        (DomainKind::Interval, vec![0.0, 1.0], 128, 0.2),
        (DomainKind::Rectangle, vec![0.0, 1.0, 0.0, 1.0], 24, 0.25),
        (DomainKind::Disk, vec![1.0], 40, 0.3),
    ] {
        let (_, grid) = build_domain(kind, &extents, resolution, margin)?;
        let f0 = DiffusivityField::constant(&grid, 1.0)?;
        let es0 = eigensolve(&grid, &f0, grid.len())?;
        let empirical = gradient_floor(&grid, &es0, FloorMode::Empirical)?;
        let constructive = gradient_floor(&grid, &es0, FloorMode::Constructive)?;
        let tail = constructive
            .witness
            .as_ref()
            .map_or(f64::NAN, |w| w.tail_c1);
        println!("{kind} ({} nodes)", grid.len());
        println!(
            "  empirical:    κ = {:>3}, c = {:.4e}",
            empirical.kappa, empirical.floor
        );
        println!(
            "  constructive: κ = {:>3}, c = {:.4e}, tail C¹ = {tail:.3}, attained {:.4e}",
            constructive.kappa, constructive.floor, constructive.attained
        );

        let members = bump_family(&grid, &f0, 8, 0.3, 0.5, 7)?;
        let grad = grid.gradient(es0.mode(1));
        let mut violations = 0;
        let mut worst = 0.0f64;
        for m in &members {
            let h: Vec<f64> = m.field.values().iter().map(|v| v - 1.0).collect();
            violations += chain_rule_audit(&grid, &h, &grad).violations;
            let h = neumann_lab::ScalarField::new(&grid, h)?;
            let b = l1_transport_bound(&grid, &h, &es0, &empirical)?;
            worst = worst.max(b.lhs / b.rhs);
        }
        println!("  chain rule violations {violations}; worst ‖h‖₁ / bound = {worst:.3}");
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
