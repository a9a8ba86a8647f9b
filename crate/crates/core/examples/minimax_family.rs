//! Hypothesis families on the interval at two scales: separation of the
//! members, the size of the two terms in the gradient expansion, and the
//! Kullback–Leibler divergence of the sampled chains.

use neumann_lab::minimax::{
    audit_pairs, build_family, build_frame, kl_joint, member_spectra, separation_audit,
    theorem_b1_bound, vg_codes, FrameSpec,
};
use neumann_lab::{build_domain, eigensolve, DiffusivityField, DomainKind};

pub fn run_example() -> neumann_lab::Result<()> {
    let (_, grid) = build_domain(DomainKind::Interval, &[0.0, 1.0], 1280, 0.1)?;
    let one = DiffusivityField::constant(&grid, 1.0)?;
    let reference = eigensolve(&grid, &one, grid.len())?;
    let d = 0.5;
    let s = 3.0;
    for j in [2u32, 3] {
        let spec = FrameSpec {
            j,
            center: [0.5, 0.0],
            radius: 0.3,
            anisotropy_c: 1.0,
            multiplier: 4,
        };
        let frame = build_frame(&grid, spec)?;
        println!(
            "j = {j}: {} frame members, half-width {} nodes, Gram defect {:.1e}",
            frame.len(),
            frame.half_width[0],
            frame.gram_defect(&grid)
        );
        let codes = vg_codes(frame.len(), 0.25, 11)?;
        let fam = build_family(&grid, frame, codes, 1.0, s, 0.5, 11)?;
        let spectra = member_spectra(&grid, &fam)?;
        let pairs = audit_pairs(fam.members.len(), 6, 11);
        let rows = separation_audit(
            &grid,
            &fam,
            &spectra,
            &reference,
            d,
            &pairs[..pairs.len().min(6)],
        )?;
        for r in &rows {
            println!(
                "  ({}, {}): I = {:.3e}  II/I = {:.3}  ‖∂₁h‖·2^(j(s-1)) = {:.4}  opnorm·2^(j(s-1)) = {:.4}",
                r.m,
                r.m_prime,
                r.i_term,
                r.ii_over_i(),
                r.d1_scaled,
                r.opnorm_scaled
            );
        }
        let (a, b) = pairs[0];
        let kl = kl_joint(
            &grid,
            &fam.members[a],
            &fam.members[b],
            &spectra[a],
            &spectra[b],
            &reference,
            d,
            1000,
            (a, b),
        )?;
        println!(
            "  KL per step {:.3e} (reversed {:.3e}), ‖h‖²_H⁻¹ = {:.3e}, ratio {:.4}",
            kl.per_step_kl,
            kl.per_step_kl_reversed,
            kl.hminus1_sq,
            kl.per_step_kl / kl.hminus1_sq
        );
    }
    println!(
        "bound at M = 16, α = 0.05: {:.5}",
        theorem_b1_bound(16, 0.05)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
