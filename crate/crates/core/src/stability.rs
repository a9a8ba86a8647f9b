//! Transport-operator estimates, gradient floors and the `L¹` stability probe.

use rayon::prelude::*;

use crate::bumps::FamilyMember;
use crate::domain::{restrict_l1, weighted_dot, DomainKind, Grid, Region, ScalarField};
use crate::error::{LabError, Result};
use crate::perturbation::{lower_bound_ratio_with, weighted_opnorm_diff, SpectralPair};
use crate::spectral::{eigensolve, flux_divergence, DiffusivityField, EigenSystem};

/// Default floor target relative to `λ₁` for empirical certificates.
pub const FLOOR_TARGET: f64 = 1e-3;

/// Discrete `∇·(h∇u)` in flux form.
pub fn transport_divergence(grid: &Grid, h: &ScalarField, u: &ScalarField) -> Result<ScalarField> {
    grid.check(h)?;
    grid.check(u)?;
    grid.field(flux_divergence(grid, h.values(), u.values()))
}

/// Flux-form `∇·(h v)` for a nodal vector field `v`.
pub fn vector_divergence(grid: &Grid, h: &[f64], v: &[[f64; 2]]) -> Vec<f64> {
    let spacing = grid.spacing();
    let mut out = vec![0.0; grid.len()];
    for face in grid.faces() {
        let hf = 0.5 * (h[face.a] + h[face.b]);
        let vf = 0.5 * (v[face.a][face.axis] + v[face.b][face.axis]);
        let flux = hf * vf * face.coef * spacing[face.axis];
        out[face.a] += flux;
        out[face.b] -= flux;
    }
    for (o, w) in out.iter_mut().zip(grid.weights()) {
        *o /= w;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainRuleReport {
    pub evaluated: usize,
    /// Nodes in the discrete zero set or whose stencil crosses a sign change.
    pub excluded: usize,
    pub violations: usize,
    pub abs_norm: f64,
    pub signed_norm: f64,
}

/// Counts nodes where `|∇·(|h|v)| > |∇·(hv)|` beyond `10⁻⁶` of the largest divergence.
pub fn chain_rule_audit(grid: &Grid, h: &[f64], v: &[[f64; 2]]) -> ChainRuleReport {
    let abs_h: Vec<f64> = h.iter().map(|x| x.abs()).collect();
    let signed = vector_divergence(grid, h, v);
    let absolute = vector_divergence(grid, &abs_h, v);
    let h_tol = 1e-10 * abs_h.iter().fold(0.0, |m: f64, x| m.max(*x));
    let mut straddles = vec![false; grid.len()];
    for face in grid.faces() {
        if h[face.a] * h[face.b] < 0.0 {
            straddles[face.a] = true;
            straddles[face.b] = true;
        }
    }
    let scale = signed
        .iter()
        .chain(&absolute)
        .fold(0.0f64, |m, x| m.max(x.abs()))
        .max(f64::MIN_POSITIVE);
    let mut report = ChainRuleReport {
        evaluated: 0,
        excluded: 0,
        violations: 0,
        abs_norm: weighted_dot(grid.weights(), &absolute, &absolute).sqrt(),
        signed_norm: weighted_dot(grid.weights(), &signed, &signed).sqrt(),
    };
    for i in 0..grid.len() {
        if abs_h[i] <= h_tol || straddles[i] {
            report.excluded += 1;
            continue;
        }
        report.evaluated += 1;
        if absolute[i].abs() > signed[i].abs() + 1e-6 * scale {
            report.violations += 1;
        }
    }
    report
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FloorMode {
    Empirical,
    Constructive,
}

/// Cut-off witness of a constructive certificate.
#[derive(Clone, Debug)]
pub struct CutoffWitness {
    pub phi: ScalarField,
    /// `sup|φ_κ| + sup|∇φ_κ|` over the inner set.
    pub tail_c1: f64,
    pub phi_l2: f64,
}

#[derive(Clone, Debug)]
pub struct GradientFloorCertificate {
    pub kappa: usize,
    pub floor: f64,
    pub mode: FloorMode,
    pub witness: Option<CutoffWitness>,
    /// Smallest `Σ_{k≤κ}|∇e_k|²` over inner nodes.
    pub attained: f64,
}

fn gradient_sums(grid: &Grid, es: &EigenSystem, kappa: usize) -> Vec<f64> {
    let mut sum = vec![0.0; grid.len()];
    for k in 1..=kappa {
        for (s, g) in sum.iter_mut().zip(grid.gradient(es.mode(k))) {
            *s += g[0] * g[0] + g[1] * g[1];
        }
    }
    sum
}

fn inner_min(grid: &Grid, v: &[f64]) -> f64 {
    v.iter()
        .zip(grid.inner_mask())
        .filter(|(_, &m)| m)
        .fold(f64::INFINITY, |m, (x, _)| m.min(*x))
}

fn inner_sup(grid: &Grid, v: impl Iterator<Item = f64>) -> f64 {
    v.zip(grid.inner_mask())
        .filter(|(_, &m)| m)
        .fold(0.0, |m, (x, _)| m.max(x.abs()))
}

/// Quintic smoothstep `6t⁵ − 15t⁴ + 10t³` clamped to `[0, 1]`.
fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (t * (6.0 * t - 15.0) + 10.0)
}

/// Cut-off equal to 1 on the inner set and 0 within `margin/4` of the boundary.
pub fn cutoff(grid: &Grid) -> ScalarField {
    let d = grid.domain().clone();
    let m = d.margin;
    let ramp = move |dist: f64| smoothstep((dist - 0.25 * m) / (0.75 * m));
    grid.field_from_fn(|p| match d.kind {
        DomainKind::Disk => ramp(d.distance_to_boundary(p)),
        _ => d
            .bounds
            .iter()
            .enumerate()
            .map(|(axis, b)| ramp((p[axis] - b[0]).min(b[1] - p[axis])))
            .product(),
    })
}

/// Finds `κ` and a floor `c` with `Σ_{k≤κ}|∇e_k|² ≥ c` on the inner set.
pub fn gradient_floor(
    grid: &Grid,
    es: &EigenSystem,
    mode: FloorMode,
) -> Result<GradientFloorCertificate> {
    es.check_grid(grid)?;
    let max_kappa = es.count() / 4;
    if max_kappa == 0 {
        return Err(LabError::Truncation(
            "too few modes for a gradient floor".into(),
        ));
    }
    match mode {
        FloorMode::Empirical => {
            let target = FLOOR_TARGET * es.eigenvalue(1);
            let mut sum = vec![0.0; grid.len()];
            for kappa in 1..=max_kappa {
                for (s, g) in sum.iter_mut().zip(grid.gradient(es.mode(kappa))) {
                    *s += g[0] * g[0] + g[1] * g[1];
                }
                let attained = inner_min(grid, &sum);
                if attained >= target {
                    return Ok(GradientFloorCertificate {
                        kappa,
                        floor: attained,
                        mode,
                        witness: None,
                        attained,
                    });
                }
            }
            Err(LabError::Truncation(format!(
                "no κ ≤ {max_kappa} reaches the floor target {target:e}"
            )))
        }
        FloorMode::Constructive => {
            let (phi, profile) = cutoff_tail_profile(grid, es, max_kappa)?;
            let Some(kappa) = profile.iter().position(|&t| t <= 0.5).map(|i| i + 1) else {
                return Err(LabError::Truncation(format!(
                    "cut-off tail stays above 1/2 for every κ ≤ {max_kappa}"
                )));
            };
            let phi_l2 = weighted_dot(grid.weights(), &phi, &phi).sqrt();
            let floor = 1.0 / (4.0 * phi_l2 * phi_l2);
            let attained = inner_min(grid, &gradient_sums(grid, es, kappa));
            if attained < floor {
                return Err(LabError::Precondition(format!(
                    "constructive floor {floor:e} not attained ({attained:e}) at κ = {kappa}"
                )));
            }
            Ok(GradientFloorCertificate {
                kappa,
                floor,
                mode,
                witness: Some(CutoffWitness {
                    phi: grid.field(phi)?,
                    tail_c1: profile[kappa - 1],
                    phi_l2,
                }),
                attained,
            })
        }
    }
}

/// `φ = χ·(x₁ − c₁) − mean` and the discrete `C¹(O₀)` norm of its spectral
/// tail `φ_κ` for `κ = 1..=max_kappa`.
pub fn cutoff_tail_profile(
    grid: &Grid,
    es: &EigenSystem,
    max_kappa: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    es.check_grid(grid)?;
    if max_kappa >= es.count() {
        return Err(LabError::Truncation(format!(
            "κ up to {max_kappa} needs more than {} modes",
            es.count()
        )));
    }
    let chi = cutoff(grid);
    let w = grid.weights();
    let x1 = grid.domain().center()[0];
    let raw: Vec<f64> = chi
        .values()
        .iter()
        .zip(grid.nodes())
        .map(|(c, p)| c * (p[0] - x1))
        .collect();
    let mean = raw.iter().zip(w).map(|(r, w)| r * w).sum::<f64>() / grid.total_weight();
    let phi: Vec<f64> = raw.iter().map(|v| v - mean).collect();
    let coeffs = es.coefficients(&phi);
    let mut tail = phi.clone();
    let mut profile = Vec::with_capacity(max_kappa);
    for kappa in 1..=max_kappa {
        for (t, e) in tail.iter_mut().zip(es.mode(kappa)) {
            *t -= coeffs[kappa] * e;
        }
        let grads = grid.gradient(&tail);
        profile.push(
            inner_sup(grid, tail.iter().copied())
                + inner_sup(
                    grid,
                    grads.iter().map(|g| (g[0] * g[0] + g[1] * g[1]).sqrt()),
                ),
        );
    }
    Ok((phi, profile))
}

impl GradientFloorCertificate {
    /// Re-checks the floor inequality against an eigensystem.
    pub fn validate(&self, grid: &Grid, es: &EigenSystem) -> Result<()> {
        if self.kappa >= es.count() {
            return Err(LabError::Truncation(
                "certificate uses unresolved modes".into(),
            ));
        }
        let attained = inner_min(grid, &gradient_sums(grid, es, self.kappa));
        if attained < self.floor * (1.0 - 1e-12) {
            return Err(LabError::Precondition(format!(
                "gradient sum {attained:e} falls below the certified floor {:e}",
                self.floor
            )));
        }
        Ok(())
    }
}

/// Both sides of `‖h‖_{L¹(O₀)} ≤ c⁻¹ Σ_{k≤κ} ‖∇·(h∇e_k)‖_{L²}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransportBound {
    pub lhs: f64,
    pub rhs: f64,
}

impl TransportBound {
    /// Holds with 1% slack for quadrature.
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs * 1.01
    }
}

pub fn l1_transport_bound(
    grid: &Grid,
    h: &ScalarField,
    es: &EigenSystem,
    certificate: &GradientFloorCertificate,
) -> Result<TransportBound> {
    grid.check(h)?;
    certificate.validate(grid, es)?;
    let boundary = grid.boundary_mask();
    if h.values()
        .iter()
        .zip(boundary)
        .any(|(v, &b)| b && *v != 0.0)
    {
        return Err(LabError::Precondition(
            "h does not vanish on the boundary".into(),
        ));
    }
    let lhs = restrict_l1(grid, h, Region::Inner)?;
    let w = grid.weights();
    let sum: f64 = (1..=certificate.kappa)
        .map(|k| {
            let g = flux_divergence(grid, h.values(), es.mode(k));
            weighted_dot(w, &g, &g).sqrt()
        })
        .sum();
    Ok(TransportBound {
        lhs,
        rhs: sum / certificate.floor,
    })
}

/// One row of the stability report.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeRow {
    pub member: usize,
    pub amplitude: f64,
    pub l1_distance: f64,
    pub opnorm: f64,
    pub ratio: f64,
    pub kappa: usize,
    pub floor: f64,
    /// `opnorm / max_{k≤κ} ‖∇·((f−f₀)∇e_k)‖`.
    pub lower_bound_ratio: f64,
    pub transport: TransportBound,
}

/// Lipschitz ratios `‖f − f₀‖_{L¹} / opnorm` over a family, with the
/// decomposition through the gradient floor, the transport bound and the
/// eigenfunction lower bound for each member.
pub fn stability_probe(
    grid: &Grid,
    f0: &DiffusivityField,
    es0: &EigenSystem,
    members: &[FamilyMember],
    amplitude: f64,
    d: f64,
    certificate: &GradientFloorCertificate,
) -> Result<Vec<ProbeRow>> {
    if es0.count() != grid.len() {
        return Err(LabError::Truncation(
            "stability probe needs a complete reference system".into(),
        ));
    }
    certificate.validate(grid, es0)?;
    for m in members {
        if !m.field.agrees_with_reference_off_inner() {
            return Err(LabError::Precondition(format!(
                "member {} differs from the reference outside the inner set",
                m.id
            )));
        }
    }
    let rows: Vec<Option<ProbeRow>> = members
        .par_iter()
        .map(|m| -> Result<Option<ProbeRow>> {
            let h: Vec<f64> = m
                .field
                .values()
                .iter()
                .zip(f0.values())
                .map(|(a, b)| a - b)
                .collect();
            if h.iter().all(|&x| x == 0.0) {
                log::info!("member {} equals the reference; ratio 0/0 excluded", m.id);
                return Ok(None);
            }
            let es = eigensolve(grid, &m.field, grid.len())?;
            let pair = SpectralPair::new(grid, &m.field, f0, &es, es0)?;
            let opnorm = weighted_opnorm_diff(&pair, d)?;
            let hf = grid.field(h)?;
            let l1_distance = restrict_l1(grid, &hf, Region::Full)?;
            let lower = lower_bound_ratio_with(&pair, opnorm, certificate.kappa)?;
            let transport = l1_transport_bound(grid, &hf, es0, certificate)?;
            Ok(Some(ProbeRow {
                member: m.id,
                amplitude,
                l1_distance,
                opnorm,
                ratio: l1_distance / opnorm,
                kappa: certificate.kappa,
                floor: certificate.floor,
                lower_bound_ratio: lower.ratio,
                transport,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// Largest ratio in a probe table: the empirical Lipschitz constant.
pub fn lipschitz_constant(rows: &[ProbeRow]) -> f64 {
    rows.iter().map(|r| r.ratio).fold(0.0, f64::max)
}
