//! Neumann spectra of the interval, the unit square and the unit disk with
//! constant diffusivity, compared with their closed forms.

use std::f64::consts::PI;

use neumann_lab::spectral::weyl_audit;
use neumann_lab::{build_domain, eigensolve, DiffusivityField, DomainKind};

/// First zero of `J₁′`.
const BESSEL_J1_PRIME_ROOT: f64 = 1.841_183_781_340_659;

pub fn run_example() -> neumann_lab::Result<()> {
    let (_, interval) = build_domain(DomainKind::Interval, &[0.0, 1.0], 256, 0.1)?;
    let one = DiffusivityField::constant(&interval, 1.0)?;
    let es = eigensolve(&interval, &one, 24)?;
    println!("interval, n = 256");
    for k in 1..=10 {
        let exact = (k as f64 * PI).powi(2);
        println!(
            "  λ_{k:<2} = {:>12.6}   k²π² = {:>12.6}",
            es.eigenvalue(k),
            exact
        );
    }
    let weyl = weyl_audit(&es, 1, 20)?;
    println!("  λ_k/k² in [{:.4}, {:.4}]", weyl.min_ratio, weyl.max_ratio);

    let (_, square) = build_domain(DomainKind::Rectangle, &[0.0, 1.0, 0.0, 1.0], 32, 0.1)?;
    let one = DiffusivityField::constant(&square, 1.0)?;
    let es = eigensolve(&square, &one, 24)?;
    let cl = es.first_cluster();
    println!(
        "square, 32×32: λ₁ = {:.6}, λ₂ = {:.6}, first cluster multiplicity {}",
        es.eigenvalue(1),
        es.eigenvalue(2),
        cl.len()
    );

    let (_, disk) = build_domain(DomainKind::Disk, &[1.0], 64, 0.2)?;
    let one = DiffusivityField::constant(&disk, 1.0)?;
    let es = eigensolve(&disk, &one, 12)?;
    println!(
        "disk, resolution 64 ({} nodes): λ₁ = {:.5} (multiplicity {}), j′₁₁² = {:.5}",
        disk.len(),
        es.eigenvalue(1),
        es.first_cluster().len(),
        BESSEL_J1_PRIME_ROOT.powi(2)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> neumann_lab::Result<()> {
    run_example()
}
