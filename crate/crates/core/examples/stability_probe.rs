//! The eigenfunction lower bound and the empirical Lipschitz constant of the
//! inverse map on the interval and the square.

use neumann_lab::bumps::bump_family;
use neumann_lab::perturbation::{lemma31_ratio, SpectralPair};
use neumann_lab::stability::{gradient_floor, lipschitz_constant, stability_probe, FloorMode};
use neumann_lab::{build_domain, eigensolve, DiffusivityField, DomainKind};

pub fn run_example() -> neumann_lab::Result<()> {
    let d = 0.1;
    for (kind, extents, resolution, margin) in [
        (DomainKind::Interval, vec![0.0, 1.0], 128, 0.2),
        (DomainKind::Rectangle, vec![0.0, 1.0, 0.0, 1.0], 20, 0.25),
    ] {
        let (_, grid) = build_domain(kind, &extents, resolution, margin)?;
        let f0 = DiffusivityField::constant(&grid, 1.0)?;
        let es0 = eigensolve(&grid, &f0, grid.len())?;
        let empirical = gradient_floor(&grid, &es0, FloorMode::Empirical)?;
        println!(
            "{kind}: {} nodes; gradient floor κ = {}, c = {:.3e}",
            grid.len(),
            empirical.kappa,
            empirical.floor
        );
        let family = bump_family(&grid, &f0, 12, 0.3, 0.5, 1)?;
        let mut min_ratio = f64::INFINITY;
        for m in &family {
            let es = eigensolve(&grid, &m.field, grid.len())?;
            let pair = SpectralPair::new(&grid, &m.field, &f0, &es, &es0)?;
            min_ratio = min_ratio.min(lemma31_ratio(&pair, d, 3)?.ratio);
        }
        println!(
            "  eigenfunction lower bound: min ratio {min_ratio:.4e} over {} members",
            family.len()
        );
        for amplitude in [0.3, 0.15] {
            let members = bump_family(&grid, &f0, 12, amplitude, 0.5, 2)?;
            let rows = stability_probe(&grid, &f0, &es0, &members, amplitude, d, &empirical)?;
            let holds = rows.iter().filter(|r| r.transport.holds()).count();
            println!(
                "  amplitude {amplitude}: Lipschitz {:.4e}, transport bound holds on {holds}/{}",
                lipschitz_constant(&rows),
                rows.len()
            );
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
