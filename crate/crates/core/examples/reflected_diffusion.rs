//! Reflected diffusion on the interval observed at a fixed time gap:
//! uniformity of the samples, pair histogram against the heat kernel, and
//! the known-basis transition estimator.

use neumann_lab::sim::{
    estimate_transition, histogram_vs_density, ks_critical_1pct, ks_uniform, population_transition,
    simulate, SimConfig,
};
use neumann_lab::spectral::transition_density;
use neumann_lab::{build_domain, eigensolve, DiffusivityField, DomainKind};

pub fn run_example() -> neumann_lab::Result<()> {
    let (_, grid) = build_domain(DomainKind::Interval, &[0.0, 1.0], 256, 0.1)?;
    let half = DiffusivityField::constant(&grid, 0.5)?;
    let cfg = SimConfig {
        d_time: 0.5,
        n_obs: 10_000,
        dt: 0.01,
        seed: 20,
    };
    let sample = simulate(&grid, &half, cfg)?;
    let xs: Vec<f64> = sample.positions.iter().map(|p| p[0]).collect();
    let ks = ks_uniform(&xs, 0.0, 1.0);
    println!(
        "f = 1/2: KS = {ks:.4} (1% critical {:.4}), {} reflections",
        ks_critical_1pct(xs.len()),
        sample.reflection_count
    );
    let es_half = eigensolve(&grid, &half, grid.len())?;
    let p = transition_density(&grid, &es_half, cfg.d_time)?;
    let cells = histogram_vs_density(&grid, &sample, &p, 4)?;
    let worst = cells.iter().map(|c| c.z_score()).fold(0.0, f64::max);
    println!("  4×4 pair histogram: worst cell {worst:.2} standard errors");

    let one = DiffusivityField::constant(&grid, 1.0)?;
    let basis = eigensolve(&grid, &one, grid.len())?;
    let p1 = transition_density(&grid, &basis, cfg.d_time)?;
    let pop = population_transition(&grid, &p1, &basis, 3)?;
    println!("f = 1: population limit of the estimator, J = 3");
    for l in 0..4 {
        let row: Vec<String> = (0..4).map(|k| format!("{:>11.3e}", pop[(l, k)])).collect();
        println!(
            "  {}   e^(-Dλ) = {:.3e}",
            row.join(" "),
            (-cfg.d_time * basis.eigenvalue(l)).exp()
        );
    }
    let sample = simulate(&grid, &one, SimConfig { seed: 21, ..cfg })?;
    let est = estimate_transition(&grid, &sample, &basis, 1)?;
    let target = (-0.5 * std::f64::consts::PI.powi(2)).exp();
    println!(
        "  M̂₁₁ = {:.5} ± {:.5}, e^(-π²/2) = {target:.5}",
        est.entries[(1, 1)],
        est.standard_errors[(1, 1)]
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
