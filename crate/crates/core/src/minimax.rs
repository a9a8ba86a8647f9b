//! Hypothesis families for minimax lower bounds: localized bump frames,
//! well-separated sign codes, separation and Kullback–Leibler audits, and the
//! generic multiple-hypothesis bound.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::domain::{weighted_dot, DomainKind, Grid, ScalarField};
use crate::error::{LabError, Result};
use crate::perturbation::{
    lower_bound_ratio_with, resolvent_gap, track_cluster, weighted_opnorm_diff, SpectralPair,
};
use crate::spectral::{
    bar_sobolev_norm, eigensolve, flux_divergence, transition_density, DiffusivityField,
    EigenSystem, TransitionDensity,
};

/// Geometry of a frame: `multiplier · 2^j` cells along `x₁` (times `2^j`
/// along `x₂` in two dimensions) tiling a block inside the ball `B_δ(x₀)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameSpec {
    pub j: u32,
    pub center: [f64; 2],
    pub radius: f64,
    /// Target ratio `‖∂₁Ψ‖ / ‖∂₂Ψ‖` (two dimensions only).
    pub anisotropy_c: f64,
    pub multiplier: usize,
}

/// Orthonormal, disjointly supported, zero-mean perturbation fields.
#[derive(Clone, Debug)]
pub struct Frame {
    pub spec: FrameSpec,
    pub dim: usize,
    pub members: Vec<ScalarField>,
    /// Half-width of every support, in nodes, per axis.
    pub half_width: [usize; 2],
    /// Oscillation parameter `q` of the `x₁` profile.
    pub oscillation: f64,
}

/// `(1 − t²)³`, a `C²` envelope on `[-1, 1]`.
fn envelope(t: f64) -> f64 {
    let u = 1.0 - t * t;
    u * u * u
}

/// Odd profile `(1 − t²)³ sin(qπt)` at integer offsets `-m..=m`, mirrored so
/// the discrete values are exactly odd.
fn odd_profile(m: usize, q: f64) -> Vec<f64> {
    let mut out = vec![0.0; 2 * m + 1];
    for i in 1..=m {
        let t = i as f64 / m as f64;
        let v = envelope(t) * (q * std::f64::consts::PI * t).sin();
        out[m + i] = v;
        out[m - i] = -v;
    }
    out
}

fn even_profile(m: usize) -> Vec<f64> {
    (0..=2 * m)
        .map(|i| envelope((i as f64 - m as f64) / m as f64))
        .collect()
}

/// `Σ v²` and `Σ (centred difference of v)²` for a profile padded with zeros.
fn profile_energies(v: &[f64], h: f64) -> (f64, f64) {
    let at = |i: isize| -> f64 {
        if i < 0 || i as usize >= v.len() {
            0.0
        } else {
            v[i as usize]
        }
    };
    let plain = v.iter().map(|x| x * x).sum();
    let deriv = (-1..=v.len() as isize)
        .map(|i| ((at(i + 1) - at(i - 1)) / (2.0 * h)).powi(2))
        .sum();
    (plain, deriv)
}

/// Discrete `‖∂₁Ψ‖/‖∂₂Ψ‖` of a separable bump.
fn anisotropy_ratio(mx: usize, my: usize, q: f64, hx: f64, hy: f64) -> f64 {
    let (px, dx) = profile_energies(&odd_profile(mx, q), hx);
    let (py, dy) = profile_energies(&even_profile(my), hy);
    (dx * py / (px * dy)).sqrt()
}

pub fn build_frame(grid: &Grid, spec: FrameSpec) -> Result<Frame> {
    let dim = grid.dim();
    if grid.domain().kind == DomainKind::Disk {
        return Err(LabError::Precondition(
            "bump frames are built on tensor grids (interval or rectangle)".into(),
        ));
    }
    if spec.multiplier == 0 {
        return Err(LabError::Precondition(
            "frame multiplier must be positive".into(),
        ));
    }
    let domain = grid.domain();
    if domain.distance_to_boundary(spec.center) < domain.margin + spec.radius {
        return Err(LabError::Precondition(format!(
            "ball of radius {} around {:?} does not fit in the inner set",
            spec.radius, spec.center
        )));
    }
    let cells = [
        spec.multiplier << spec.j,
        if dim == 2 { 1usize << spec.j } else { 1 },
    ];
    let half_extent = if dim == 2 {
        spec.radius / 2f64.sqrt()
    } else {
        spec.radius
    };
    let spacing = grid.spacing();
    let mut half_width = [0usize; 2];
    let mut start = [0isize; 2];
    for axis in 0..dim {
        let h = spacing[axis];
        let center_idx = ((spec.center[axis] - domain.bounds[axis][0]) / h).round() as isize;
        let offset = (spec.center[axis] - (domain.bounds[axis][0] + center_idx as f64 * h)).abs();
        let mut m =
            ((2.0 * (half_extent - offset)) / (cells[axis] as f64 * 2.0 * h)).floor() as usize;
        while m >= 1 && (m * cells[axis]) as f64 * h + offset > half_extent {
            m -= 1;
        }
        if m < 3 {
            return Err(LabError::Precondition(format!(
                "ball too small for j = {}: support half-width {m} nodes on axis {axis}",
                spec.j
            )));
        }
        half_width[axis] = m;
        start[axis] = center_idx - (m * cells[axis]) as isize;
    }
    let oscillation = if dim == 2 {
        calibrate_oscillation(half_width, spacing, spec.anisotropy_c)?
    } else {
        1.0
    };
    let px = odd_profile(half_width[0], oscillation);
    let py = if dim == 2 {
        even_profile(half_width[1])
    } else {
        vec![1.0]
    };
    let my = if dim == 2 { half_width[1] } else { 0 };

    let mut members = Vec::with_capacity(cells[0] * cells[1]);
    for cy in 0..cells[1] {
        for cx in 0..cells[0] {
            let ca = start[0] + (half_width[0] + 2 * half_width[0] * cx) as isize;
            let cb = if dim == 2 {
                start[1] + (half_width[1] + 2 * half_width[1] * cy) as isize
            } else {
                0
            };
            let mut values = vec![0.0; grid.len()];
            for (iy, vy) in py.iter().enumerate() {
                for (ix, vx) in px.iter().enumerate() {
                    let v = vx * vy;
                    if v == 0.0 {
                        continue;
                    }
                    let a = ca + ix as isize - half_width[0] as isize;
                    let b = cb + iy as isize - my as isize;
                    let node = (a >= 0 && b >= 0)
                        .then(|| grid.node_at(a as usize, b as usize))
                        .flatten()
                        .ok_or_else(|| {
                            LabError::Precondition("frame support leaves the grid".into())
                        })?;
                    let p = grid.nodes()[node];
                    let dist =
                        ((p[0] - spec.center[0]).powi(2) + (p[1] - spec.center[1]).powi(2)).sqrt();
                    if dist > spec.radius * (1.0 + 1e-12) {
                        return Err(LabError::Precondition(
                            "frame support leaves the ball".into(),
                        ));
                    }
                    values[node] = v;
                }
            }
            let norm = weighted_dot(grid.weights(), &values, &values).sqrt();
            values.iter_mut().for_each(|v| *v /= norm);
            members.push(grid.field(values)?);
        }
    }
    Ok(Frame {
        spec,
        dim,
        members,
        half_width,
        oscillation,
    })
}

/// Bisection for the oscillation `q` that produces the requested anisotropy.
fn calibrate_oscillation(half_width: [usize; 2], spacing: [f64; 2], target: f64) -> Result<f64> {
    let ratio = |q: f64| anisotropy_ratio(half_width[0], half_width[1], q, spacing[0], spacing[1]);
    let mut lo = 0.25;
    let mut hi = (half_width[0] as f64 / 3.0).max(1.0);
    if !(ratio(lo) <= target && ratio(hi) >= target) {
        return Err(LabError::Precondition(format!(
            "anisotropy {target} outside the attainable range [{}, {}] at this resolution",
            ratio(lo),
            ratio(hi)
        )));
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

impl Frame {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Largest `|⟨Ψ_r, Ψ_s⟩ − δ_rs|`.
    pub fn gram_defect(&self, grid: &Grid) -> f64 {
        let w = grid.weights();
        let mut worst: f64 = 0.0;
        for (r, a) in self.members.iter().enumerate() {
            for (s, b) in self.members.iter().enumerate().skip(r) {
                let target = if r == s { 1.0 } else { 0.0 };
                worst = worst.max((weighted_dot(w, a.values(), b.values()) - target).abs());
            }
        }
        worst
    }

    /// Discrete `‖∂₁Ψ_r‖ / ‖∂₂Ψ_r‖` for every member (two dimensions).
    pub fn anisotropy(&self, grid: &Grid) -> Vec<f64> {
        let w = grid.weights();
        self.members
            .iter()
            .map(|psi| {
                let g = grid.gradient(psi.values());
                let d1: f64 = g.iter().zip(w).map(|(g, w)| g[0] * g[0] * w).sum();
                let d2: f64 = g.iter().zip(w).map(|(g, w)| g[1] * g[1] * w).sum();
                (d1 / d2).sqrt()
            })
            .collect()
    }
}

pub type Code = Vec<i8>;

pub fn hamming(a: &[i8], b: &[i8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Greedy randomized sign codes of length `n` with pairwise Hamming distance
/// at least `⌈n · min_frac⌉` and at least `max(4, 2^{⌈n/8⌉})` members.
pub fn vg_codes(n: usize, min_frac: f64, seed: u64) -> Result<Vec<Code>> {
    if n < 8 {
        return Err(LabError::Precondition(format!("code length {n} below 8")));
    }
    let min_dist = (n as f64 * min_frac).ceil() as usize;
    let target = 4usize.max(1usize << n.div_ceil(8).min(12));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut codes: Vec<Code> = Vec::with_capacity(target);
    let budget = 2000 * target;
    for _ in 0..budget {
        if codes.len() == target {
            break;
        }
        let c: Code = (0..n)
            .map(|_| if rng.random_bool(0.5) { 1 } else { -1 })
            .collect();
        if codes.iter().all(|d| hamming(d, &c) >= min_dist) {
            codes.push(c);
        }
    }
    if codes.len() < target {
        return Err(LabError::Precondition(format!(
            "found only {} codes of length {n} at distance {min_dist}; need {target}",
            codes.len()
        )));
    }
    Ok(codes)
}

/// Diffusivities `f_m = 1 + η 2^{-j(s+d/2)} Σ_r β_{r,m} Ψ_r`.
#[derive(Clone, Debug)]
pub struct HypothesisFamily {
    pub base: DiffusivityField,
    pub frame: Frame,
    pub codes: Vec<Code>,
    pub members: Vec<DiffusivityField>,
    pub eta: f64,
    pub smoothness_s: f64,
    pub seed: u64,
}

impl HypothesisFamily {
    pub fn j(&self) -> u32 {
        self.frame.spec.j
    }

    /// `η 2^{-j(s+d/2)}`.
    pub fn scale(&self) -> f64 {
        amplitude_scale(self.eta, self.j(), self.smoothness_s, self.frame.dim)
    }

    /// Perturbation `f_m − f₀`.
    pub fn perturbation(&self, m: usize) -> Vec<f64> {
        self.members[m]
            .values()
            .iter()
            .zip(self.base.values())
            .map(|(a, b)| a - b)
            .collect()
    }

    /// Text manifest: `j`, `η`, `c`, `s`, seed and the code matrix.
    pub fn manifest(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "j {}", self.j());
        let _ = writeln!(s, "eta {}", self.eta);
        let _ = writeln!(s, "anisotropy_c {}", self.frame.spec.anisotropy_c);
        let _ = writeln!(s, "s {}", self.smoothness_s);
        let _ = writeln!(s, "seed {}", self.seed);
        let _ = writeln!(s, "codes {} {}", self.codes.len(), self.frame.len());
        for c in &self.codes {
            let row: Vec<String> = c.iter().map(|b| format!("{b:+}")).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }
}

fn amplitude_scale(eta: f64, j: u32, s: f64, dim: usize) -> f64 {
    eta * 2f64.powf(-(j as f64) * (s + dim as f64 / 2.0))
}

/// Builds the family, halving `η` until every member stays above `f_min`.
pub fn build_family(
    grid: &Grid,
    frame: Frame,
    codes: Vec<Code>,
    eta: f64,
    s: f64,
    f_min: f64,
    seed: u64,
) -> Result<HypothesisFamily> {
    if codes.iter().any(|c| c.len() != frame.len()) {
        return Err(LabError::Precondition(
            "code length differs from frame size".into(),
        ));
    }
    let base = DiffusivityField::constant(grid, 1.0)?;
    let mut eta = eta;
    for _ in 0..64 {
        let scale = amplitude_scale(eta, frame.spec.j, s, frame.dim);
        let fields: Vec<Vec<f64>> = codes
            .iter()
            .map(|code| {
                let mut v = vec![1.0; grid.len()];
                for (b, psi) in code.iter().zip(&frame.members) {
                    for (x, p) in v.iter_mut().zip(psi.values()) {
                        *x += scale * f64::from(*b) * p;
                    }
                }
                v
            })
            .collect();
        let lo = fields
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if lo >= f_min {
            let members = fields
                .into_iter()
                .map(|v| DiffusivityField::relative_to(grid, grid.field(v)?, f_min, &base))
                .collect::<Result<Vec<_>>>()?;
            return Ok(HypothesisFamily {
                base,
                frame,
                codes,
                members,
                eta,
                smoothness_s: s,
                seed,
            });
        }
        log::warn!("η = {eta} drives a member to {lo} < f_min = {f_min}; halving η");
        eta *= 0.5;
    }
    Err(LabError::Precondition(
        "could not restore positivity by shrinking η".into(),
    ))
}

/// Complete eigensystems of every member, computed in parallel.
pub fn member_spectra(grid: &Grid, fam: &HypothesisFamily) -> Result<Vec<EigenSystem>> {
    fam.members
        .par_iter()
        .map(|f| eigensolve(grid, f, grid.len()))
        .collect()
}

/// Pairs to audit: all of them for small families, otherwise a seeded sample.
pub fn audit_pairs(m: usize, max_pairs: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut all: Vec<(usize, usize)> = (0..m)
        .flat_map(|a| ((a + 1)..m).map(move |b| (a, b)))
        .collect();
    if m > 8 && all.len() > max_pairs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        all.shuffle(&mut rng);
        all.truncate(max_pairs);
        all.sort_unstable();
    }
    all
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparationRow {
    pub m: usize,
    pub m_prime: usize,
    /// `‖∇(f_m − f_{m'})·∇E‖`.
    pub i_term: f64,
    /// `‖(f_m − f_{m'}) ΔE‖`.
    pub ii_term: f64,
    pub d1_norm: f64,
    pub d1_scaled: f64,
    pub opnorm: f64,
    pub opnorm_scaled: f64,
    /// `max_{k≤a} ‖∇·((f_m − f_{m'})∇e_{k,m'})‖`.
    pub max_transport: f64,
    /// `‖∇·((f_m − f_{m'})∇E)‖`.
    pub transport_e: f64,
    pub multiplicity: usize,
}

impl SeparationRow {
    pub fn ii_over_i(&self) -> f64 {
        if self.i_term == 0.0 {
            0.0
        } else {
            self.ii_term / self.i_term
        }
    }
}

/// Separation quantities for pairs of family members. `E` is the tracked
/// first-cluster vector of `f_{m'}` relative to the constant reference.
pub fn separation_audit(
    grid: &Grid,
    fam: &HypothesisFamily,
    spectra: &[EigenSystem],
    reference: &EigenSystem,
    d: f64,
    pairs: &[(usize, usize)],
) -> Result<Vec<SeparationRow>> {
    let w = grid.weights();
    let scale = 2f64.powf(fam.j() as f64 * (fam.smoothness_s - 1.0));
    let tracked: Vec<Option<ScalarField>> = {
        let needed: std::collections::BTreeSet<usize> = pairs.iter().map(|p| p.1).collect();
        (0..fam.members.len())
            .into_par_iter()
            .map(|m| -> Result<Option<ScalarField>> {
                if !needed.contains(&m) {
                    return Ok(None);
                }
                let gap = resolvent_gap(grid, &spectra[m], reference)?;
                Ok(Some(
                    track_cluster(grid, &spectra[m], reference, gap)?.tracked,
                ))
            })
            .collect::<Result<Vec<_>>>()?
    };
    pairs
        .par_iter()
        .map(|&(m, mp)| {
            let h: Vec<f64> = fam.members[m]
                .values()
                .iter()
                .zip(fam.members[mp].values())
                .map(|(a, b)| a - b)
                .collect();
            let e = tracked[mp]
                .as_ref()
                .expect("tracked vector computed for every m'");
            let ge = grid.gradient(e.values());
            let gh = grid.gradient(&h);
            let mut i_sq = 0.0;
            let mut ii_sq = 0.0;
            let mut d1_sq = 0.0;
            for i in 0..grid.len() {
                let dot = gh[i][0] * ge[i][0] + gh[i][1] * ge[i][1];
                i_sq += w[i] * dot * dot;
                d1_sq += w[i] * gh[i][0] * gh[i][0];
                if h[i] != 0.0 {
                    let lap = grid
                        .second_differences_at(e.values(), i)
                        .map_or(0.0, |s| s[0] + s[1]);
                    ii_sq += w[i] * (h[i] * lap).powi(2);
                }
            }
            let pair = SpectralPair::new(
                grid,
                &fam.members[m],
                &fam.members[mp],
                &spectra[m],
                &spectra[mp],
            )?;
            let opnorm = weighted_opnorm_diff(&pair, d)?;
            let a = reference.first_cluster().len();
            let lower = lower_bound_ratio_with(&pair, opnorm, a)?;
            let te = flux_divergence(grid, &h, e.values());
            Ok(SeparationRow {
                m,
                m_prime: mp,
                i_term: i_sq.sqrt(),
                ii_term: ii_sq.sqrt(),
                d1_norm: d1_sq.sqrt(),
                d1_scaled: d1_sq.sqrt() * scale,
                opnorm,
                opnorm_scaled: opnorm * scale,
                max_transport: lower.max_transport,
                transport_e: weighted_dot(w, &te, &te).sqrt(),
                multiplicity: a,
            })
        })
        .collect()
}

/// Which law the expectation in a Kullback–Leibler divergence is taken under.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum KlConvention {
    /// `KL(f_m, f₀) = E_{f₀} log(p_{f₀}/p_{f_m})`: expectation under the second argument.
    #[default]
    Display,
    /// `KL(P, Q) = E_P log(P/Q)`: expectation under the first argument.
    Definition,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KlReport {
    pub pair: (usize, usize),
    /// One-step divergence with the expectation under the first argument.
    pub per_step_kl: f64,
    /// The same with the arguments swapped.
    pub per_step_kl_reversed: f64,
    pub n: usize,
    pub total: f64,
    pub hminus1_sq: f64,
}

/// `∬ (1/|O|) [p_a log(p_a/p_b) − p_a + p_b]`; each term is nonnegative.
pub fn kl_per_step(grid: &Grid, pa: &TransitionDensity, pb: &TransitionDensity) -> Result<f64> {
    let w = grid.weights();
    let vol = grid.total_weight();
    let n = grid.len();
    let mut total = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            let a = pa.values[(i, j)];
            let b = pb.values[(i, j)];
            let term = if a == 0.0 {
                b
            } else if b == 0.0 {
                return Err(LabError::Precondition(format!(
                    "reference density vanishes at ({i}, {j}) where the other is {a}"
                )));
            } else {
                a * (a / b).ln() - a + b
            };
            row += term * w[j];
        }
        total += row * w[i] / vol;
    }
    Ok(total)
}

fn checked_density(grid: &Grid, es: &EigenSystem, d: f64) -> Result<TransitionDensity> {
    let p = transition_density(grid, es, d)?;
    if p.clip_mass > 1e-4 {
        return Err(LabError::Precondition(format!(
            "transition density negative on a set of mass {:e}",
            p.clip_mass
        )));
    }
    Ok(p)
}

/// Joint-law divergence over `N` transitions from uniform start, plus the
/// squared `H̄⁻¹` distance of the diffusivities in the reference basis.
#[allow(clippy::too_many_arguments)]
pub fn kl_joint(
    grid: &Grid,
    fa: &DiffusivityField,
    fb: &DiffusivityField,
    es_a: &EigenSystem,
    es_b: &EigenSystem,
    reference: &EigenSystem,
    d: f64,
    n: usize,
    pair: (usize, usize),
) -> Result<KlReport> {
    let pa = checked_density(grid, es_a, d)?;
    let pb = checked_density(grid, es_b, d)?;
    let per_step_kl = kl_per_step(grid, &pa, &pb)?;
    let per_step_kl_reversed = kl_per_step(grid, &pb, &pa)?;
    let diff = fa.field().sub(fb.field())?;
    let hm1 = bar_sobolev_norm(grid, &diff, reference, -1.0)?;
    Ok(KlReport {
        pair,
        per_step_kl,
        per_step_kl_reversed,
        n,
        total: n as f64 * per_step_kl,
        hminus1_sq: hm1 * hm1,
    })
}

/// `(√M/(1+√M)) (1 − 2α − √(8α/log M))`, clipped below at zero.
pub fn theorem_b1_bound(m: usize, alpha: f64) -> Result<f64> {
    if m < 3 {
        return Err(LabError::Precondition(format!(
            "need at least 3 hypotheses, got {m}"
        )));
    }
    if !(alpha > 0.0) {
        return Err(LabError::Precondition(format!(
            "α = {alpha} must be positive"
        )));
    }
    let sm = (m as f64).sqrt();
    let v = sm / (1.0 + sm) * (1.0 - 2.0 * alpha - (8.0 * alpha / (m as f64).ln()).sqrt());
    Ok(v.max(0.0))
}

/// Rate exponent `(s − 1)/(2s + 2 + d)` for `s ≥ max(2d − 1, 2 + d/2)`.
pub fn rate_exponent(s: f64, d: usize) -> Result<f64> {
    let df = d as f64;
    if !(1..=2).contains(&d) {
        return Err(LabError::Precondition(format!(
            "dimension {d} not in {{1, 2}}"
        )));
    }
    if s < 2.0 * df - 1.0 {
        return Err(LabError::Precondition(format!(
            "s = {s} violates s ≥ 2d − 1 = {}",
            2.0 * df - 1.0
        )));
    }
    if s < 2.0 + df / 2.0 {
        return Err(LabError::Precondition(format!(
            "s = {s} violates s ≥ 2 + d/2 = {}",
            2.0 + df / 2.0
        )));
    }
    Ok((s - 1.0) / (2.0 * s + 2.0 + df))
}

/// Scale `j(N) = round(log₂N / (2s + 2 + d))`.
pub fn scale_for_sample_size(n: usize, s: f64, d: usize) -> u32 {
    ((n as f64).log2() / (2.0 * s + 2.0 + d as f64))
        .round()
        .max(0.0) as u32
}

/// Settings of the end-to-end lower-bound pipeline.
#[derive(Clone, Debug)]
pub struct PipelineSetup {
    pub frame_center: [f64; 2],
    pub frame_radius: f64,
    pub anisotropy_c: f64,
    pub multiplier: usize,
    pub s: f64,
    pub d_time: f64,
    pub f_min: f64,
    pub eta: f64,
    pub alpha_target: f64,
    pub convention: KlConvention,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineRow {
    pub n: usize,
    pub j: u32,
    pub hypotheses: usize,
    pub eta: f64,
    pub alpha: f64,
    pub bound: f64,
    pub min_separation: f64,
    pub separation_scaled: f64,
    pub shrink_steps: usize,
}

/// For each `N`: picks `j(N)`, builds the family, measures pairwise
/// separation, and shrinks `η` until `α ≤ α_target` and the bound exceeds 1/4.
pub fn end_to_end_lower_bound_demo(
    grid: &Grid,
    setup: &PipelineSetup,
    n_list: &[usize],
) -> Result<Vec<PipelineRow>> {
    let dim = grid.dim();
    let rate = rate_exponent(setup.s, dim)?;
    let f0 = DiffusivityField::constant(grid, 1.0)?;
    let es0 = eigensolve(grid, &f0, grid.len())?;
    let p0 = checked_density(grid, &es0, setup.d_time)?;
    let mut rows = Vec::new();
    for &n in n_list {
        let j = scale_for_sample_size(n, setup.s, dim).max(1);
        let frame = build_frame(
            grid,
            FrameSpec {
                j,
                center: setup.frame_center,
                radius: setup.frame_radius,
                anisotropy_c: setup.anisotropy_c,
                multiplier: setup.multiplier,
            },
        )?;
        let codes = vg_codes(frame.len(), 0.25, setup.seed)?;
        let m = codes.len();
        let mut eta = setup.eta;
        let mut steps = 0;
        loop {
            let fam = build_family(
                grid,
                frame.clone(),
                codes.clone(),
                eta,
                setup.s,
                setup.f_min,
                setup.seed,
            )?;
            eta = fam.eta;
            let spectra = member_spectra(grid, &fam)?;
            let kls = spectra
                .par_iter()
                .map(|es| {
                    let pm = checked_density(grid, es, setup.d_time)?;
                    match setup.convention {
                        KlConvention::Display => kl_per_step(grid, &p0, &pm),
                        KlConvention::Definition => kl_per_step(grid, &pm, &p0),
                    }
                })
                .collect::<Result<Vec<f64>>>()?;
            let mean_kl = n as f64 * kls.iter().sum::<f64>() / m as f64;
            let alpha = mean_kl / (m as f64).ln();
            let bound = theorem_b1_bound(m, alpha.max(f64::MIN_POSITIVE))?;
            if (alpha <= setup.alpha_target && bound > 0.25) || steps >= 40 {
                let pairs = audit_pairs(m, 28, setup.seed);
                let seps = pairs
                    .par_iter()
                    .map(|&(a, b)| {
                        let pair = SpectralPair::new(
                            grid,
                            &fam.members[a],
                            &fam.members[b],
                            &spectra[a],
                            &spectra[b],
                        )?;
                        weighted_opnorm_diff(&pair, setup.d_time)
                    })
                    .collect::<Result<Vec<f64>>>()?;
                let min_separation = seps.iter().copied().fold(f64::INFINITY, f64::min);
                rows.push(PipelineRow {
                    n,
                    j,
                    hypotheses: m,
                    eta,
                    alpha,
                    bound,
                    min_separation,
                    separation_scaled: min_separation * (n as f64).powf(rate),
                    shrink_steps: steps,
                });
                break;
            }
            eta *= 0.5;
            steps += 1;
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_arithmetic() {
        let v = theorem_b1_bound(16, 0.05).unwrap();
        let expected = 0.8 * (1.0 - 0.1 - (0.4f64 / 16f64.ln()).sqrt());
        assert!((v - expected).abs() < 1e-15);
        assert!((v - 0.416).abs() < 1e-3);
        assert!(theorem_b1_bound(2, 0.05).is_err());
        assert!(theorem_b1_bound(1 << 40, 1e-12).unwrap() > 0.999);
    }

    #[test]
    fn rate_exponent_values_and_admissibility() {
        assert_eq!(rate_exponent(3.0, 2).unwrap(), 0.2);
        assert_eq!(rate_exponent(3.0, 1).unwrap(), 2.0 / 9.0);
        assert!((rate_exponent(1e9, 1).unwrap() - 0.5).abs() < 1e-8);
        let err = rate_exponent(2.0, 1).unwrap_err().to_string();
        assert!(err.contains("2 + d/2"), "{err}");
        let err = rate_exponent(2.9, 2).unwrap_err().to_string();
        assert!(err.contains("2d − 1"), "{err}");
    }

    #[test]
    fn profiles_are_exactly_odd_and_even() {
        let p = odd_profile(7, 1.3);
        assert!((1..=7).all(|i| p[7 + i] == -p[7 - i]));
        assert_eq!(p[7], 0.0);
        let e = even_profile(5);
        assert_eq!(e[0], 0.0);
        assert_eq!(e[10], 0.0);
        assert_eq!(e[5], 1.0);
    }

    #[test]
    fn codes_meet_their_distance() {
        for n in [8, 16, 32] {
            let codes = vg_codes(n, 0.25, 0).unwrap();
            assert!(codes.len() >= 4);
            assert!((codes.len() as f64).log2() >= n as f64 / 8.0);
            for (i, a) in codes.iter().enumerate() {
                for b in &codes[i + 1..] {
                    assert!(hamming(a, b) * 4 >= n);
                }
            }
        }
        assert!(vg_codes(7, 0.25, 0).is_err());
    }
}
