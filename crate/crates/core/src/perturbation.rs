//! Perturbation theory for the discrete semigroup: the pseudo-linearisation
//! (Duhamel) identity, the weighted cross-operator norm, the eigenfunction
//! lower-bound ratio, resolvent gaps and eigencluster tracking.
//!
//! Every semigroup difference is computed from eigendecompositions, never by
//! time stepping, so the Duhamel identity holds to rounding error whenever
//! both eigensystems are complete.

use faer::Mat;

use crate::domain::{weighted_dot, Grid, Region, ScalarField};
use crate::error::{LabError, Result};
use crate::linalg;
use crate::spectral::{flux_divergence, DiffusivityField, EigenSystem};

/// Relative gap under which `b` switches to its coincident-eigenvalue form.
pub const DEGENERATE_TOL: f64 = 1e-8;

/// `∫₀ᴰ e^{-sλ₀} e^{-(D-s)λ} ds`, evaluated without cancellation.
pub fn b_coefficient(lambda_k0: f64, lambda_lf: f64, d: f64) -> f64 {
    let delta = (lambda_lf - lambda_k0).abs();
    if delta <= DEGENERATE_TOL * (1.0 + lambda_k0.abs()) {
        return d * (-d * lambda_k0).exp();
    }
    let lo = lambda_k0.min(lambda_lf);
    (-d * lo).exp() * (-(-d * delta).exp_m1()) / delta
}

/// Two diffusivities on one grid with their eigensystems.
#[derive(Clone, Copy, Debug)]
pub struct SpectralPair<'a> {
    pub grid: &'a Grid,
    pub f: &'a DiffusivityField,
    pub f0: &'a DiffusivityField,
    pub es: &'a EigenSystem,
    pub es0: &'a EigenSystem,
}

impl<'a> SpectralPair<'a> {
    pub fn new(
        grid: &'a Grid,
        f: &'a DiffusivityField,
        f0: &'a DiffusivityField,
        es: &'a EigenSystem,
        es0: &'a EigenSystem,
    ) -> Result<Self> {
        for id in [f.grid_id(), f0.grid_id(), es.grid_id(), es0.grid_id()] {
            if id != grid.id() {
                return Err(LabError::GridMismatch {
                    expected: grid.id(),
                    found: id,
                });
            }
        }
        if es.diffusivity_id() != f.id() || es0.diffusivity_id() != f0.id() {
            return Err(LabError::Precondition(
                "eigensystem does not belong to its diffusivity".into(),
            ));
        }
        if es.count() != es0.count() {
            return Err(LabError::Truncation(format!(
                "eigensystems have {} and {} modes",
                es.count(),
                es0.count()
            )));
        }
        Ok(SpectralPair {
            grid,
            f,
            f0,
            es,
            es0,
        })
    }

    /// `h = f − f₀`.
    pub fn difference(&self) -> Vec<f64> {
        self.f
            .values()
            .iter()
            .zip(self.f0.values())
            .map(|(a, b)| a - b)
            .collect()
    }

    /// `G_k = ∇·((f − f₀)∇e_{k,f₀})`.
    pub fn transport_term(&self, k: usize) -> Vec<f64> {
        flux_divergence(self.grid, &self.difference(), self.es0.mode(k))
    }

    fn l2(&self, v: &[f64]) -> f64 {
        weighted_dot(self.grid.weights(), v, v).sqrt()
    }

    /// Cross Gram matrix `C_{lk} = ⟨e_{l,f}, e_{k,f₀}⟩`.
    pub fn cross_gram(&self) -> Mat<f64> {
        cross_gram(self.grid, self.es, self.es0)
    }
}

pub(crate) fn cross_gram(grid: &Grid, a: &EigenSystem, b: &EigenSystem) -> Mat<f64> {
    let w = grid.weights();
    let wb = Mat::from_fn(b.modes().nrows(), b.count(), |i, k| {
        b.modes()[(i, k)] * w[i]
    });
    linalg::matmul_tn(a.modes(), &wb)
}

/// Outcome of one Duhamel check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DuhamelResidual {
    pub residual: f64,
    pub lhs_norm: f64,
    pub relative: f64,
}

/// Compares `P_{D,f}e_{k,f₀} − P_{D,f₀}e_{k,f₀}` with `Σ_l b_{l,k}⟨e_{l,f}, G_k⟩e_{l,f}`.
pub fn pseudo_linearisation_residual(
    pair: &SpectralPair,
    d: f64,
    k: usize,
) -> Result<DuhamelResidual> {
    if k == 0 || k >= pair.es0.count() {
        return Err(LabError::Precondition(format!(
            "mode index {k} out of range"
        )));
    }
    let ek = pair.es0.mode(k);
    let lk0 = pair.es0.eigenvalue(k);
    let mut coeffs = pair.es.coefficients(ek);
    for (c, lam) in coeffs.iter_mut().zip(pair.es.eigenvalues()) {
        *c *= (-d * lam).exp();
    }
    let mut lhs = pair.es.synthesize(&coeffs);
    let decay = (-d * lk0).exp();
    for (l, e) in lhs.iter_mut().zip(ek) {
        *l -= decay * e;
    }

    let g = pair.transport_term(k);
    let mut gc = pair.es.coefficients(&g);
    for (c, lam) in gc.iter_mut().zip(pair.es.eigenvalues()) {
        *c *= b_coefficient(lk0, *lam, d);
    }
    let rhs = pair.es.synthesize(&gc);

    let diff: Vec<f64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
    let residual = pair.l2(&diff);
    let lhs_norm = pair.l2(&lhs);
    let relative = if lhs_norm > 0.0 {
        residual / lhs_norm
    } else {
        residual
    };
    Ok(DuhamelResidual {
        residual,
        lhs_norm,
        relative,
    })
}

/// Weighted cross-operator matrix `λ_{l,f} ⟨e_{l,f}, (P_{D,f} − P_{D,f₀}) e_{k,f₀}⟩ / λ_{k,f₀}`
/// over `l, k ≥ 1`.
pub fn cross_operator_matrix(pair: &SpectralPair, d: f64) -> Result<Mat<f64>> {
    let j = pair.es.count();
    if j < pair.grid.len() {
        let tail = (-d * pair.es.eigenvalue(j - 1))
            .exp()
            .max((-d * pair.es0.eigenvalue(j - 1)).exp());
        if tail > 1e-8 {
            return Err(LabError::Truncation(format!(
                "semigroup tail e^(-Dλ_J) = {tail:e} exceeds 1e-8"
            )));
        }
    }
    let c = pair.cross_gram();
    let lf = pair.es.eigenvalues();
    let l0 = pair.es0.eigenvalues();
    Ok(Mat::from_fn(j - 1, j - 1, |l, k| {
        let (l, k) = (l + 1, k + 1);
        let m = ((-d * lf[l]).exp() - (-d * l0[k]).exp()) * c[(l, k)];
        lf[l] * m / l0[k]
    }))
}

/// Spectral norm of [`cross_operator_matrix`]; the surrogate for the
/// `H² → H²` operator norm of `P_{D,f} − P_{D,f₀}`.
pub fn weighted_opnorm_diff(pair: &SpectralPair, d: f64) -> Result<f64> {
    linalg::spectral_norm(&cross_operator_matrix(pair, d)?)
}

/// Ratio of the operator-norm surrogate to `max_{k≤κ} ‖G_k‖`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowerBoundRatio {
    pub ratio: f64,
    pub argmax_k: usize,
    pub opnorm: f64,
    pub max_transport: f64,
}

pub fn lemma31_ratio(pair: &SpectralPair, d: f64, kappa: usize) -> Result<LowerBoundRatio> {
    let opnorm = weighted_opnorm_diff(pair, d)?;
    lower_bound_ratio_with(pair, opnorm, kappa)
}

/// Same as [`lemma31_ratio`] with a precomputed operator norm.
pub fn lower_bound_ratio_with(
    pair: &SpectralPair,
    opnorm: f64,
    kappa: usize,
) -> Result<LowerBoundRatio> {
    if kappa == 0 || kappa >= pair.es0.count() {
        return Err(LabError::Precondition(format!("κ = {kappa} out of range")));
    }
    let (argmax_k, max_transport) = (1..=kappa)
        .map(|k| (k, pair.l2(&pair.transport_term(k))))
        .fold(
            (0, -1.0),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        );
    if max_transport < 1e-12 {
        return Err(LabError::Undefined(
            "every transport term vanishes; the ratio is 0/0".into(),
        ));
    }
    Ok(LowerBoundRatio {
        ratio: opnorm / max_transport,
        argmax_k,
        opnorm,
        max_transport,
    })
}

/// Operator-norm distance of the inverses of `−L_f` and `−L_{f₀}` on mean-zero fields.
/// Both eigensystems must be complete.
pub fn resolvent_gap(grid: &Grid, es: &EigenSystem, es_ref: &EigenSystem) -> Result<f64> {
    let n = grid.len();
    for s in [es, es_ref] {
        s.check_grid(grid)?;
        if s.count() != n {
            return Err(LabError::Truncation(format!(
                "resolvent needs all {n} modes, have {}",
                s.count()
            )));
        }
    }
    let sw: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    let inverse = |s: &EigenSystem| {
        let scaled = Mat::from_fn(n, n - 1, |i, k| {
            s.modes()[(i, k + 1)] * sw[i] / s.eigenvalue(k + 1)
        });
        let y = Mat::from_fn(n, n - 1, |i, k| s.modes()[(i, k + 1)] * sw[i]);
        linalg::matmul(&scaled, &y.transpose().to_owned())
    };
    let diff = inverse(es) - inverse(es_ref);
    let ev = linalg::symmetric_eigenvalues(&diff)?;
    Ok(ev.iter().fold(0.0, |m, v| m.max(v.abs())))
}

/// Tracked first eigencluster of a perturbed operator.
#[derive(Clone, Debug)]
pub struct ClusterProjection {
    pub multiplicity: usize,
    pub cluster_eigenvalues: Vec<f64>,
    /// Orthonormal basis of the tracked subspace (nodal values, one column per mode).
    pub basis: Mat<f64>,
    pub tracked: ScalarField,
    pub alphas: Vec<f64>,
    /// `‖P_W e_{1,ref}‖`.
    pub overlap: f64,
    /// Gap of the reference cluster on the inverse scale.
    pub cluster_gap: f64,
    pub resolvent_gap: f64,
}

/// Follows the first reference eigencluster to the perturbed operator.
///
/// The multiplicity comes from the reference spectrum. Tracking is refused
/// unless the reference cluster gap exceeds twice the resolvent gap.
pub fn track_cluster(
    grid: &Grid,
    es: &EigenSystem,
    reference: &EigenSystem,
    resolvent_gap: f64,
) -> Result<ClusterProjection> {
    es.check_grid(grid)?;
    reference.check_grid(grid)?;
    let cluster = reference.first_cluster();
    let a = cluster.len();
    if a == 0 || cluster.end >= reference.count() || cluster.end > es.count() {
        return Err(LabError::Truncation("first cluster is not resolved".into()));
    }
    let cluster_gap = 1.0 / reference.eigenvalue(1) - 1.0 / reference.eigenvalue(cluster.end);
    if cluster_gap <= 2.0 * resolvent_gap {
        return Err(LabError::Precondition(format!(
            "cluster gap {cluster_gap:e} does not exceed twice the resolvent gap {resolvent_gap:e}; perturbation too large"
        )));
    }
    let w = grid.weights();
    let e11 = reference.mode(1);
    let raw: Vec<f64> = cluster
        .clone()
        .map(|k| weighted_dot(w, es.mode(k), e11))
        .collect();
    let overlap = raw.iter().map(|c| c * c).sum::<f64>().sqrt();
    if overlap <= 0.5 {
        return Err(LabError::Precondition(format!(
            "projection of the reference mode has norm {overlap} ≤ 1/2"
        )));
    }
    let alphas: Vec<f64> = raw.iter().map(|c| c / overlap).collect();
    let n = grid.len();
    let mut tracked = vec![0.0; n];
    for (k, al) in cluster.clone().zip(&alphas) {
        for (t, e) in tracked.iter_mut().zip(es.mode(k)) {
            *t += al * e;
        }
    }
    let basis = Mat::from_fn(n, a, |i, c| es.modes()[(i, cluster.start + c)]);
    Ok(ClusterProjection {
        multiplicity: a,
        cluster_eigenvalues: cluster.map(|k| es.eigenvalue(k)).collect(),
        basis,
        tracked: ScalarField::from_parts(tracked, grid.id()),
        alphas,
        overlap,
        cluster_gap,
        resolvent_gap,
    })
}

impl ClusterProjection {
    /// Projector `Y Yᵀ` in `W^{1/2}` coordinates, where it is an orthogonal projector.
    pub fn projector_matrix(&self, grid: &Grid) -> Mat<f64> {
        let sw: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
        let y = Mat::from_fn(self.basis.nrows(), self.basis.ncols(), |i, c| {
            self.basis[(i, c)] * sw[i]
        });
        linalg::matmul(&y, &y.transpose().to_owned())
    }

    /// Operator-norm distance between two tracked subspaces of equal dimension.
    pub fn projector_distance(&self, other: &ClusterProjection, grid: &Grid) -> Result<f64> {
        if self.multiplicity != other.multiplicity {
            return Err(LabError::Precondition(
                "subspaces differ in dimension".into(),
            ));
        }
        let w = grid.weights();
        let a = self.multiplicity;
        let g = Mat::from_fn(a, a, |i, j| {
            weighted_dot(w, self.basis.col_as_slice(i), other.basis.col_as_slice(j))
        });
        let s = linalg::singular_values(&g)?;
        let smin = s.last().copied().unwrap_or(0.0).min(1.0);
        Ok((1.0 - smin * smin).max(0.0).sqrt())
    }

    /// Sup of second differences of `E_f − e_{1,ref}` over the inner set.
    pub fn c2_distance(&self, grid: &Grid, reference: &EigenSystem) -> f64 {
        let d: Vec<f64> = self
            .tracked
            .values()
            .iter()
            .zip(reference.mode(1))
            .map(|(a, b)| a - b)
            .collect();
        grid.sup_second_differences(&d, Region::Inner)
    }

    /// `‖E_f − e_{1,ref}‖_{L²}`.
    pub fn l2_distance(&self, grid: &Grid, reference: &EigenSystem) -> f64 {
        let d: Vec<f64> = self
            .tracked
            .values()
            .iter()
            .zip(reference.mode(1))
            .map(|(a, b)| a - b)
            .collect();
        weighted_dot(grid.weights(), &d, &d).sqrt()
    }
}
