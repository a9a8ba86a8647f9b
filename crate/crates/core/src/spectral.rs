//! Discrete Neumann operator `∇·(f∇)`, its eigensystem, spectral Sobolev
//! norms, the heat semigroup and the transition density.
//!
//! The operator is assembled in flux form on the faces of a [`Grid`]:
//!
//! ```text
//! (L_f u)_i = w_i⁻¹ Σ_{faces (i,j)} f_face · g_ij · (u_j − u_i),   f_face = (f_i + f_j)/2
//! ```
//!
//! so `−L_f = W⁻¹K_f` with `K_f` symmetric positive semidefinite and
//! constants in its kernel. Eigenpairs come from the symmetric matrix
//! `W^{-1/2} K_f W^{-1/2}`; eigenfields are returned as nodal values that are
//! orthonormal in the quadrature inner product.

use std::fmt::Write as _;
use std::ops::Range;

use faer::Mat;

use crate::domain::{l2_inner, weighted_dot, Grid, ScalarField};
use crate::error::{LabError, Result};
use crate::hash::digest_f64s;
use crate::linalg;

/// Relative gap below which neighbouring eigenvalues form one cluster.
pub const CLUSTER_TOL: f64 = 1e-6;
/// Largest admissible Sobolev index for spectral norms.
pub const S_MAX: f64 = 8.0;

/// Grid sample of a positive diffusivity.
#[derive(Clone, Debug)]
pub struct DiffusivityField {
    field: ScalarField,
    f_min: f64,
    sup_norm: f64,
    agrees_with_reference_off_inner: bool,
    id: u64,
}

impl DiffusivityField {
    pub fn new(grid: &Grid, field: ScalarField, f_min: f64) -> Result<Self> {
        grid.check(&field)?;
        if !(f_min > 0.0) {
            return Err(LabError::InvalidDiffusivity(format!(
                "f_min = {f_min} must be positive"
            )));
        }
        let lo = field.values().iter().copied().fold(f64::INFINITY, f64::min);
        if lo < f_min {
            return Err(LabError::InvalidDiffusivity(format!(
                "minimum value {lo} below f_min = {f_min}"
            )));
        }
        let sup_norm = field.sup_norm();
        let mut key = field.values().to_vec();
        key.push(f64::from_bits(grid.id()));
        let id = digest_f64s(&key);
        Ok(DiffusivityField {
            field,
            f_min,
            sup_norm,
            agrees_with_reference_off_inner: false,
            id,
        })
    }

    pub fn constant(grid: &Grid, c: f64) -> Result<Self> {
        Self::new(grid, grid.constant(c), c)
    }

    /// Builds `values` and records whether it equals `reference` exactly
    /// at every node outside the inner set.
    pub fn relative_to(
        grid: &Grid,
        field: ScalarField,
        f_min: f64,
        reference: &DiffusivityField,
    ) -> Result<Self> {
        let mut out = Self::new(grid, field, f_min)?;
        let inner = grid.inner_mask();
        out.agrees_with_reference_off_inner = out
            .values()
            .iter()
            .zip(reference.values())
            .enumerate()
            .all(|(i, (a, b))| inner[i] || a == b);
        Ok(out)
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn values(&self) -> &[f64] {
        self.field.values()
    }

    pub fn f_min(&self) -> f64 {
        self.f_min
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn agrees_with_reference_off_inner(&self) -> bool {
        self.agrees_with_reference_off_inner
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn grid_id(&self) -> u64 {
        self.field.grid_id()
    }
}

/// Flux-form `∇·(h∇u)` with face-averaged `h`; boundary faces carry no flux.
pub fn flux_divergence(grid: &Grid, h: &[f64], u: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    for face in grid.faces() {
        let flux = 0.5 * (h[face.a] + h[face.b]) * face.coef * (u[face.b] - u[face.a]);
        out[face.a] += flux;
        out[face.b] -= flux;
    }
    for (o, w) in out.iter_mut().zip(grid.weights()) {
        *o /= w;
    }
    out
}

/// Discrete Dirichlet energy `Σ_faces g_ij (u_i − u_j)²`, the squared gradient norm.
pub fn dirichlet_energy(grid: &Grid, u: &[f64]) -> f64 {
    grid.faces()
        .iter()
        .map(|f| f.coef * (u[f.a] - u[f.b]).powi(2))
        .sum()
}

/// Assembled Neumann operator of one diffusivity.
#[derive(Clone, Debug)]
pub struct NeumannOperator {
    stiffness: Mat<f64>,
    weights: Vec<f64>,
    grid_id: u64,
}

/// Assembles the dense stiffness matrix `K_f`; `L_f = −W⁻¹K_f`.
pub fn assemble_neumann(grid: &Grid, f: &DiffusivityField) -> Result<NeumannOperator> {
    grid.check(f.field())?;
    if let Some(i) = f.values().iter().position(|&v| !(v > 0.0)) {
        return Err(LabError::InvalidDiffusivity(format!(
            "nonpositive value at node {i}"
        )));
    }
    let n = grid.len();
    let mut k = Mat::<f64>::zeros(n, n);
    let vals = f.values();
    for face in grid.faces() {
        let c = 0.5 * (vals[face.a] + vals[face.b]) * face.coef;
        k[(face.a, face.a)] += c;
        k[(face.b, face.b)] += c;
        k[(face.a, face.b)] -= c;
        k[(face.b, face.a)] -= c;
    }
    Ok(NeumannOperator {
        stiffness: k,
        weights: grid.weights().to_vec(),
        grid_id: grid.id(),
    })
}

impl NeumannOperator {
    pub fn stiffness(&self) -> &Mat<f64> {
        &self.stiffness
    }

    pub fn grid_id(&self) -> u64 {
        self.grid_id
    }

    /// `L_f u`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let mut out = vec![0.0; n];
        for j in 0..n {
            let uj = u[j];
            if uj == 0.0 {
                continue;
            }
            let col = self.stiffness.col_as_slice(j);
            for (o, kij) in out.iter_mut().zip(col) {
                *o -= kij * uj;
            }
        }
        for (o, w) in out.iter_mut().zip(&self.weights) {
            *o /= w;
        }
        out
    }

    /// The matrix of `L_f` acting on nodal values.
    pub fn matrix(&self) -> Mat<f64> {
        let n = self.weights.len();
        Mat::from_fn(n, n, |i, j| -self.stiffness[(i, j)] / self.weights[i])
    }

    /// `W^{-1/2} K_f W^{-1/2}`, the symmetric form whose eigenvalues are those of `−L_f`.
    pub fn symmetric_form(&self) -> Mat<f64> {
        let n = self.weights.len();
        let s: Vec<f64> = self.weights.iter().map(|w| w.sqrt().recip()).collect();
        Mat::from_fn(n, n, |i, j| self.stiffness[(i, j)] * s[i] * s[j])
    }

    /// Largest `|A_ij w_i − A_ji w_j|`, the defect of self-adjointness in the weighted product.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.weights.len();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for i in 0..j {
                let a = self.stiffness[(i, j)];
                let b = self.stiffness[(j, i)];
                worst = worst.max((a - b).abs());
            }
        }
        worst
    }
}

/// Ordered eigenpairs of `−L_f`.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    eigenvalues: Vec<f64>,
    modes: Mat<f64>,
    clusters: Vec<Range<usize>>,
    weights: Vec<f64>,
    grid_id: u64,
    diffusivity_id: u64,
}

/// Solves for the first `count` eigenpairs of `−L_f` (all of them if `count`
/// equals the node count).
pub fn eigensolve(grid: &Grid, f: &DiffusivityField, count: usize) -> Result<EigenSystem> {
    let n = grid.len();
    if count < 2 {
        return Err(LabError::Truncation(format!(
            "need at least 2 modes, asked for {count}"
        )));
    }
    if count > n {
        return Err(LabError::Truncation(format!(
            "asked for {count} modes on a grid of {n} nodes"
        )));
    }
    let op = assemble_neumann(grid, f)?;
    let (mut values, y) = linalg::symmetric_eigen(&op.symmetric_form())?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(LabError::Eigensolver("non-finite eigenvalue".into()));
    }
    values.truncate(count);
    let w = grid.weights();
    let total: f64 = w.iter().sum();
    let mut modes = Mat::from_fn(n, count, |i, k| y[(i, k)] / w[i].sqrt());

    if values[0].abs() > 1e-8 * values[1].abs().max(f64::MIN_POSITIVE) {
        return Err(LabError::Eigensolver(format!(
            "ground eigenvalue {} is not resolved as zero against λ₁ = {}",
            values[0], values[1]
        )));
    }
    values[0] = 0.0;
    let c = total.sqrt().recip();
    for i in 0..n {
        modes[(i, 0)] = c;
    }

    let clusters = find_clusters(&values);
    for cl in &clusters {
        if cl.len() > 1 && cl.end <= count {
            fix_cluster_basis(grid, &mut modes, cl.clone());
        }
    }
    for k in 1..count {
        normalize_sign(w, modes.col_as_slice_mut(k));
    }

    Ok(EigenSystem {
        eigenvalues: values,
        modes,
        clusters,
        weights: w.to_vec(),
        grid_id: grid.id(),
        diffusivity_id: f.id(),
    })
}

/// Groups indices `k ≥ 1` whose consecutive eigenvalues agree within [`CLUSTER_TOL`].
pub fn find_clusters(values: &[f64]) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 1;
    for k in 2..=values.len() {
        let split = k == values.len()
            || (values[k] - values[k - 1]).abs() > CLUSTER_TOL * (1.0 + values[k - 1].abs());
        if split {
            out.push(start..k);
            start = k;
        }
    }
    out
}

/// Centred coordinate monomials of increasing degree, used to pin down a
/// basis inside a degenerate eigenspace.
fn moment_functionals(grid: &Grid) -> Vec<Vec<f64>> {
    let w = grid.weights();
    let total: f64 = w.iter().sum();
    let nodes = grid.nodes();
    let cx = nodes.iter().zip(w).map(|(p, w)| p[0] * w).sum::<f64>() / total;
    let cy = nodes.iter().zip(w).map(|(p, w)| p[1] * w).sum::<f64>() / total;
    let mut out = Vec::new();
    let max_degree = 6;
    for degree in 1..=max_degree {
        for py in 0..=degree {
            let px = degree - py;
            if grid.dim() == 1 && py > 0 {
                continue;
            }
            out.push(
                nodes
                    .iter()
                    .map(|p| (p[0] - cx).powi(px) * (p[1] - cy).powi(py))
                    .collect(),
            );
        }
    }
    out
}

fn fix_cluster_basis(grid: &Grid, modes: &mut Mat<f64>, cluster: Range<usize>) {
    let w = grid.weights();
    let size = cluster.len();
    let old: Vec<Vec<f64>> = cluster
        .clone()
        .map(|k| modes.col_as_slice(k).to_vec())
        .collect();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(size);
    let candidates = moment_functionals(grid)
        .into_iter()
        .chain(old.iter().cloned());
    for g in candidates {
        if basis.len() == size {
            break;
        }
        // Project onto the cluster, then remove components already chosen.
        let mut v = vec![0.0; g.len()];
        let mut scale = 0.0;
        for e in &old {
            let c = weighted_dot(w, &g, e);
            scale += c * c;
            for (vi, ei) in v.iter_mut().zip(e) {
                *vi += c * ei;
            }
        }
        for b in &basis {
            let c = weighted_dot(w, &v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= c * bi;
            }
        }
        let norm = weighted_dot(w, &v, &v).sqrt();
        if norm > 1e-6 * scale.sqrt().max(1e-300) && norm > 1e-10 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    for (k, b) in cluster.zip(basis) {
        modes.col_as_slice_mut(k).copy_from_slice(&b);
    }
}

/// Flips `v` so that its first weighted component of non-negligible size is positive.
pub(crate) fn normalize_sign(w: &[f64], v: &mut [f64]) {
    let peak = v
        .iter()
        .zip(w)
        .fold(0.0f64, |m, (a, b)| m.max((a * b).abs()));
    if let Some((x, _)) = v.iter().zip(w).find(|(a, b)| (*a * *b).abs() > 1e-6 * peak) {
        if *x < 0.0 {
            v.iter_mut().for_each(|a| *a = -*a);
        }
    }
}

impl EigenSystem {
    pub fn count(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues[k]
    }

    /// Nodal values of mode `k`.
    pub fn mode(&self, k: usize) -> &[f64] {
        self.modes.col_as_slice(k)
    }

    pub fn eigenfield(&self, k: usize) -> ScalarField {
        ScalarField::from_parts(self.mode(k).to_vec(), self.grid_id)
    }

    /// Modes as columns of an `n × J` matrix.
    pub fn modes(&self) -> &Mat<f64> {
        &self.modes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn grid_id(&self) -> u64 {
        self.grid_id
    }

    pub fn diffusivity_id(&self) -> u64 {
        self.diffusivity_id
    }

    /// Clusters of indices `k ≥ 1` with coinciding eigenvalues.
    pub fn clusters(&self) -> &[Range<usize>] {
        &self.clusters
    }

    /// Indices of the first nonzero eigenvalue and its copies.
    pub fn first_cluster(&self) -> Range<usize> {
        self.clusters.first().cloned().unwrap_or(1..1)
    }

    pub fn multiplicity(&self, k: usize) -> usize {
        self.clusters
            .iter()
            .find(|c| c.contains(&k))
            .map_or(1, |c| c.len())
    }

    /// Weighted coefficients `⟨u, e_k⟩` for every resolved mode.
    pub fn coefficients(&self, u: &[f64]) -> Vec<f64> {
        let wu: Vec<f64> = u.iter().zip(&self.weights).map(|(a, b)| a * b).collect();
        (0..self.count())
            .map(|k| linalg::dot(&wu, self.mode(k)))
            .collect()
    }

    /// `Σ_k c_k e_k`.
    pub fn synthesize(&self, coefficients: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.weights.len()];
        for (k, &c) in coefficients.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for (o, e) in out.iter_mut().zip(self.mode(k)) {
                *o += c * e;
            }
        }
        out
    }

    /// Largest `|⟨e_i, e_j⟩ − δ_ij|`.
    pub fn gram_defect(&self) -> f64 {
        let n = self.weights.len();
        let sw: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let y = Mat::from_fn(n, self.count(), |i, k| self.modes[(i, k)] * sw[i]);
        let g = linalg::matmul_tn(&y, &y);
        let mut worst: f64 = 0.0;
        for j in 0..self.count() {
            for i in 0..self.count() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).abs());
            }
        }
        worst
    }

    pub(crate) fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.grid_id != grid.id() {
            return Err(LabError::GridMismatch {
                expected: grid.id(),
                found: self.grid_id,
            });
        }
        Ok(())
    }
}

/// Weyl ratio table `λ_k k^{-2/d}`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeylReport {
    pub rows: Vec<(usize, f64, f64)>,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

pub fn weyl_audit(es: &EigenSystem, dim: usize, max_k: usize) -> Result<WeylReport> {
    let top = max_k.min(es.count() - 1);
    if top < 10 {
        return Err(LabError::Truncation(format!(
            "Weyl audit needs 10 modes, have {top}"
        )));
    }
    let p = 2.0 / dim as f64;
    let rows: Vec<(usize, f64, f64)> = (1..=top)
        .map(|k| {
            let lam = es.eigenvalue(k);
            (k, lam, lam / (k as f64).powf(p))
        })
        .collect();
    let min_ratio = rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    let max_ratio = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    Ok(WeylReport {
        rows,
        min_ratio,
        max_ratio,
    })
}

/// Spectral Sobolev norm `(Σ_{k≥1} λ_k^s ⟨g, e_k⟩²)^{1/2}` over resolved modes.
pub fn bar_sobolev_norm(grid: &Grid, g: &ScalarField, es: &EigenSystem, s: f64) -> Result<f64> {
    grid.check(g)?;
    es.check_grid(grid)?;
    if !(-2.0..=S_MAX).contains(&s) {
        return Err(LabError::Precondition(format!(
            "Sobolev index {s} outside [-2, {S_MAX}]"
        )));
    }
    let coeffs = es.coefficients(g.values());
    let energy = l2_inner(grid, g, g)?;
    if energy == 0.0 {
        return Ok(0.0);
    }
    if coeffs[0].abs() > 1e-8 * energy.sqrt() {
        log::warn!(
            "field has mean component {:e}; projecting onto mean-zero space",
            coeffs[0]
        );
    }
    let resolved: f64 = coeffs.iter().map(|c| c * c).sum();
    let tail = (energy - resolved).max(0.0);
    if tail > 0.01 * energy {
        return Err(LabError::Truncation(format!(
            "{:.2}% of the field energy lies beyond the {} resolved modes",
            100.0 * tail / energy,
            es.count()
        )));
    }
    let sum: f64 = coeffs
        .iter()
        .zip(es.eigenvalues())
        .skip(1)
        .map(|(c, lam)| lam.powf(s) * c * c)
        .sum();
    Ok(sum.sqrt())
}

/// `P_t` restricted to the first `truncation` modes of an eigensystem.
#[derive(Clone, Copy, Debug)]
pub struct SemigroupOperator<'a> {
    es: &'a EigenSystem,
    time: f64,
    truncation: usize,
}

pub fn semigroup(es: &EigenSystem, time: f64, truncation: usize) -> Result<SemigroupOperator<'_>> {
    if !(time >= 0.0) || !time.is_finite() {
        return Err(LabError::Precondition(format!(
            "time {time} must be finite and nonnegative"
        )));
    }
    if truncation == 0 || truncation > es.count() {
        return Err(LabError::Truncation(format!(
            "truncation {truncation} outside 1..={}",
            es.count()
        )));
    }
    Ok(SemigroupOperator {
        es,
        time,
        truncation,
    })
}

impl SemigroupOperator<'_> {
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Spectral multipliers `e^{-tλ_k}`.
    pub fn multipliers(&self) -> Vec<f64> {
        self.es.eigenvalues()[..self.truncation]
            .iter()
            .map(|lam| (-self.time * lam).exp())
            .collect()
    }

    pub fn apply_values(&self, phi: &[f64]) -> Vec<f64> {
        let mut c = self.es.coefficients(phi);
        c.truncate(self.truncation);
        for (ck, m) in c.iter_mut().zip(self.multipliers()) {
            *ck *= m;
        }
        self.es.synthesize(&c)
    }

    pub fn apply(&self, phi: &ScalarField) -> Result<ScalarField> {
        if phi.grid_id() != self.es.grid_id {
            return Err(LabError::GridMismatch {
                expected: self.es.grid_id,
                found: phi.grid_id(),
            });
        }
        Ok(ScalarField::from_parts(
            self.apply_values(phi.values()),
            self.es.grid_id,
        ))
    }
}

/// Nodal transition density `p_t(x_i, y_j)`.
#[derive(Clone, Debug)]
pub struct TransitionDensity {
    pub time: f64,
    pub values: Mat<f64>,
    /// Stationary-weighted mass removed by clipping negative values.
    pub clip_mass: f64,
    /// Weyl estimate of the neglected spectral tail `Σ_{k≥J} e^{-tλ_k}`.
    pub tail_bound: f64,
    /// Largest deviation of a row integral from one.
    pub row_defect: f64,
}

/// Weyl-type bound on `Σ_{J≤k<n} e^{-tλ_k}` using the smallest observed ratio `λ_k k^{-2/d}`.
pub fn spectral_tail_bound(es: &EigenSystem, dim: usize, nodes: usize, t: f64) -> f64 {
    let j = es.count();
    if j >= nodes {
        return 0.0;
    }
    let p = 2.0 / dim as f64;
    let c1 = (1..j)
        .map(|k| es.eigenvalue(k) / (k as f64).powf(p))
        .fold(f64::INFINITY, f64::min);
    let mut sum = 0.0;
    for k in j..nodes {
        let term = (-t * c1 * (k as f64).powf(p)).exp();
        sum += term;
        if term < 1e-30 {
            break;
        }
    }
    sum
}

pub fn transition_density(grid: &Grid, es: &EigenSystem, t: f64) -> Result<TransitionDensity> {
    es.check_grid(grid)?;
    if !(t > 0.0) {
        return Err(LabError::Precondition(format!("time {t} must be positive")));
    }
    let tail_bound = spectral_tail_bound(es, grid.dim(), grid.len(), t);
    if tail_bound > 1e-6 {
        return Err(LabError::Truncation(format!(
            "spectral tail {tail_bound:e} exceeds 1e-6 at t = {t}; increase J or t"
        )));
    }
    let n = grid.len();
    let j = es.count();
    let scaled = Mat::from_fn(n, j, |i, k| {
        es.modes[(i, k)] * (-t * es.eigenvalue(k)).exp()
    });
    let mut values = linalg::matmul(&scaled, &es.modes.transpose().to_owned());
    let w = grid.weights();
    let total: f64 = w.iter().sum();
    let mut clip_mass = 0.0;
    let mut row_defect: f64 = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for jj in 0..n {
            let v = values[(i, jj)];
            if v < 0.0 {
                clip_mass += w[i] / total * (-v) * w[jj];
                values[(i, jj)] = 0.0;
            }
            row += values[(i, jj)] * w[jj];
        }
        row_defect = row_defect.max((row - 1.0).abs());
    }
    Ok(TransitionDensity {
        time: t,
        values,
        clip_mass,
        tail_bound,
        row_defect,
    })
}

/// Ratio statistics of spectral to finite-difference Sobolev norms.
#[derive(Clone, Debug, PartialEq)]
pub struct NormAudit {
    pub order: usize,
    pub ratios: Vec<f64>,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

pub fn norm_equivalence_audit(
    grid: &Grid,
    es: &EigenSystem,
    samples: &[ScalarField],
    orders: &[usize],
) -> Result<Vec<NormAudit>> {
    let inner = grid.inner_mask();
    for (idx, g) in samples.iter().enumerate() {
        grid.check(g)?;
        let sup = g.sup_norm();
        if g.values()
            .iter()
            .enumerate()
            .any(|(i, v)| !inner[i] && v.abs() > 1e-12 * sup)
        {
            return Err(LabError::Precondition(format!(
                "sample {idx} is not supported in the inner set"
            )));
        }
    }
    orders
        .iter()
        .map(|&k| {
            let ratios = samples
                .iter()
                .map(|g| {
                    let spectral = bar_sobolev_norm(grid, g, es, k as f64)?;
                    let fd = grid.fd_sobolev_norm(g.values(), k);
                    Ok(spectral / fd)
                })
                .collect::<Result<Vec<f64>>>()?;
            let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
            Ok(NormAudit {
                order: k,
                ratios,
                min_ratio,
                max_ratio,
            })
        })
        .collect()
}

/// Text export: header (mode count, grid and diffusivity digests) and one
/// `k λ_k values…` record per mode.
pub fn write_eigensystem_text(es: &EigenSystem) -> String {
    let mut s = String::from("# neumann-lab eigensystem v1\n");
    let _ = writeln!(s, "modes {}", es.count());
    let _ = writeln!(s, "grid {:016x}", es.grid_id);
    let _ = writeln!(s, "diffusivity {:016x}", es.diffusivity_id);
    for k in 0..es.count() {
        let _ = write!(s, "{k} {}", es.eigenvalue(k));
        for v in es.mode(k) {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    s
}
