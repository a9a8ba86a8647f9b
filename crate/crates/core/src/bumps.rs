//! Seeded families of smooth bump perturbations supported in the inner set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{DomainKind, Grid, ScalarField};
use crate::error::{LabError, Result};
use crate::spectral::DiffusivityField;

/// Standard `C^∞` bump `exp(1 − 1/(1 − r²))` with peak 1 at the centre and support `r < 1`.
pub fn smooth_bump(r: f64) -> f64 {
    if r.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    }
}

/// One bump: centre, radius and signed height.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    pub center: [f64; 2],
    pub radius: f64,
    pub height: f64,
}

impl Bump {
    pub fn eval(&self, p: [f64; 2]) -> f64 {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        self.height * smooth_bump((dx * dx + dy * dy).sqrt() / self.radius)
    }
}

/// Sum of bumps sampled on the grid.
pub fn bump_field(grid: &Grid, bumps: &[Bump]) -> ScalarField {
    grid.field_from_fn(|p| bumps.iter().map(|b| b.eval(p)).sum())
}

/// Half-width of the inner set along its narrowest direction.
fn inner_half_width(grid: &Grid) -> f64 {
    let d = grid.domain();
    match d.kind {
        DomainKind::Disk => d.radius().unwrap_or(0.0) - d.margin,
        _ => 0.5 * d.smallest_extent() - d.margin,
    }
}

/// Draws a centre such that a ball of `radius` around it stays inside the inner set.
fn draw_center(grid: &Grid, radius: f64, rng: &mut ChaCha8Rng) -> [f64; 2] {
    let d = grid.domain();
    let keep = d.margin + radius;
    match d.kind {
        DomainKind::Disk => loop {
            let r = d.radius().unwrap_or(0.0) - keep;
            let x = rng.random_range(-r..=r);
            let y = rng.random_range(-r..=r);
            if x * x + y * y <= r * r {
                return [x, y];
            }
        },
        _ => {
            let mut c = [0.0; 2];
            for (axis, b) in d.bounds.iter().enumerate() {
                c[axis] = rng.random_range(b[0] + keep..=b[1] - keep);
            }
            c
        }
    }
}

/// Random sum of one to `max_bumps` bumps with random signs; heights are
/// drawn from `[amplitude/2, amplitude]`.
pub fn random_bumps(
    grid: &Grid,
    amplitude: f64,
    max_bumps: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Bump> {
    let half = inner_half_width(grid);
    let count = rng.random_range(1..=max_bumps.max(1));
    (0..count)
        .map(|_| {
            let radius = half * rng.random_range(0.3..=0.6);
            let center = draw_center(grid, radius, rng);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let height = sign * amplitude * rng.random_range(0.5..=1.0);
            Bump {
                center,
                radius,
                height,
            }
        })
        .collect()
}

/// A family member: the bumps that define it and the resulting diffusivity.
#[derive(Clone, Debug)]
pub struct FamilyMember {
    pub id: usize,
    pub bumps: Vec<Bump>,
    pub field: DiffusivityField,
}

/// `f = f₀ + Σ bumps`, clipped below at `f_min`.
pub fn perturb(
    grid: &Grid,
    reference: &DiffusivityField,
    bumps: &[Bump],
    f_min: f64,
) -> Result<DiffusivityField> {
    let h = bump_field(grid, bumps);
    let values: Vec<f64> = reference
        .values()
        .iter()
        .zip(h.values())
        .map(|(a, b)| (a + b).max(f_min))
        .collect();
    let field = grid.field(values)?;
    let f = DiffusivityField::relative_to(grid, field, f_min, reference)?;
    if !f.agrees_with_reference_off_inner() {
        return Err(LabError::Precondition(
            "bump perturbation leaks outside the inner set".into(),
        ));
    }
    Ok(f)
}

/// Seeded family of `count` members. The same seed yields the same bump
/// geometry for every amplitude, so amplitude sweeps compare like with like.
pub fn bump_family(
    grid: &Grid,
    reference: &DiffusivityField,
    count: usize,
    amplitude: f64,
    f_min: f64,
    seed: u64,
) -> Result<Vec<FamilyMember>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|id| {
            let bumps = random_bumps(grid, amplitude, 5, &mut rng);
            let field = perturb(grid, reference, &bumps, f_min)?;
            Ok(FamilyMember { id, bumps, field })
        })
        .collect()
}
