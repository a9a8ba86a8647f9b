//! Reflected diffusion simulation, low-frequency sampling and the
//! known-basis estimator of the transition operator.

use std::fmt::Write as _;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::domain::{weighted_dot, Domain, DomainKind, Grid};
use crate::error::{LabError, Result};
use crate::linalg;
use crate::spectral::{spectral_tail_bound, DiffusivityField, EigenSystem, TransitionDensity};

/// Folds a point back into the closure of the domain.
///
/// Boxes are folded coordinatewise, the disk radially (`r → 2R − r`).
/// Points more than one diameter outside are rejected.
pub fn reflect(p: [f64; 2], domain: &Domain) -> Result<[f64; 2]> {
    if !p[0].is_finite() || !p[1].is_finite() {
        return Err(LabError::Precondition(format!("non-finite point {p:?}")));
    }
    let reject = |excess: f64, diam: f64| -> Result<()> {
        if excess > diam {
            Err(LabError::Precondition(format!(
                "point {p:?} lies {excess} outside the domain, beyond one diameter ({diam}); reduce dt"
            )))
        } else {
            Ok(())
        }
    };
    match domain.kind {
        DomainKind::Disk => {
            let big_r = domain.radius().unwrap_or(0.0);
            let r = p[0].hypot(p[1]);
            if r <= big_r {
                return Ok(p);
            }
            reject(r - big_r, 2.0 * big_r)?;
            let folded = 2.0 * big_r - r;
            Ok([p[0] / r * folded, p[1] / r * folded])
        }
        _ => {
            let mut q = p;
            for axis in 0..domain.dim {
                let [lo, hi] = domain.bounds[axis];
                let width = hi - lo;
                reject((lo - q[axis]).max(q[axis] - hi), width)?;
                while q[axis] < lo || q[axis] > hi {
                    if q[axis] < lo {
                        q[axis] = 2.0 * lo - q[axis];
                    } else {
                        q[axis] = 2.0 * hi - q[axis];
                    }
                }
            }
            Ok(q)
        }
    }
}

/// Multilinear interpolation of nodal values. Lattice positions outside the
/// grid (disk corners) borrow the value of the nearest node.
#[derive(Clone, Debug)]
pub struct Interpolator {
    lo: [f64; 2],
    spacing: [f64; 2],
    dims: [usize; 2],
    dim: usize,
    filled: Vec<usize>,
}

/// Corner nodes and weights of one evaluation point.
pub type Stencil = [(usize, f64); 4];

impl Interpolator {
    pub fn new(grid: &Grid) -> Result<Self> {
        let dims = grid.lattice_dims();
        let mut filled = vec![usize::MAX; dims[0] * dims[1]];
        for b in 0..dims[1] {
            for a in 0..dims[0] {
                filled[a + b * dims[0]] = match grid.node_at(a, b) {
                    Some(n) => n,
                    None => nearest_node(grid, a, b).ok_or_else(|| {
                        LabError::Precondition(format!("no node near lattice position ({a}, {b})"))
                    })?,
                };
            }
        }
        let d = grid.domain();
        Ok(Interpolator {
            lo: [
                d.bounds[0][0],
                if grid.dim() == 2 { d.bounds[1][0] } else { 0.0 },
            ],
            spacing: grid.spacing(),
            dims,
            dim: grid.dim(),
            filled,
        })
    }

    pub fn stencil(&self, p: [f64; 2]) -> Stencil {
        let locate = |axis: usize| -> (usize, f64) {
            if axis >= self.dim || self.dims[axis] < 2 {
                return (0, 0.0);
            }
            let u = ((p[axis] - self.lo[axis]) / self.spacing[axis]).max(0.0);
            let cell = (u.floor() as usize).min(self.dims[axis] - 2);
            (cell, (u - cell as f64).clamp(0.0, 1.0))
        };
        let (a, tx) = locate(0);
        let (b, ty) = locate(1);
        let at = |da: usize, db: usize| {
            let bb = (b + db).min(self.dims[1] - 1);
            self.filled[(a + da) + bb * self.dims[0]]
        };
        [
            (at(0, 0), (1.0 - tx) * (1.0 - ty)),
            (at(1, 0), tx * (1.0 - ty)),
            (at(0, 1), (1.0 - tx) * ty),
            (at(1, 1), tx * ty),
        ]
    }

    pub fn eval(&self, values: &[f64], p: [f64; 2]) -> f64 {
        apply_stencil(&self.stencil(p), values)
    }
}

pub fn apply_stencil(st: &Stencil, values: &[f64]) -> f64 {
    st.iter()
        .map(|&(n, w)| if w == 0.0 { 0.0 } else { w * values[n] })
        .sum()
}

fn nearest_node(grid: &Grid, a: usize, b: usize) -> Option<usize> {
    let target = grid.lattice_point(a, b);
    let mut best: Option<(f64, usize)> = None;
    for r in 1..=4isize {
        for db in -r..=r {
            for da in -r..=r {
                let (aa, bb) = (a as isize + da, b as isize + db);
                if aa < 0 || bb < 0 {
                    continue;
                }
                if let Some(n) = grid.node_at(aa as usize, bb as usize) {
                    let q = grid.nodes()[n];
                    let d2 = (q[0] - target[0]).powi(2) + (q[1] - target[1]).powi(2);
                    if best.is_none_or(|(bd, bn)| d2 < bd || (d2 == bd && n < bn)) {
                        best = Some((d2, n));
                    }
                }
            }
        }
        if best.is_some() {
            break;
        }
    }
    best.map(|(_, n)| n)
}

/// Observations `X₀, X_D, …, X_{ND}` of one reflected trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySample {
    pub times: Vec<f64>,
    pub positions: Vec<[f64; 2]>,
    pub seed: u64,
    pub dt: f64,
    pub d_time: f64,
    pub reflection_count: u64,
}

impl TrajectorySample {
    /// Number of transitions `N`.
    pub fn transitions(&self) -> usize {
        self.positions.len().saturating_sub(1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    pub d_time: f64,
    pub n_obs: usize,
    pub dt: f64,
    pub seed: u64,
}

fn uniform_point(domain: &Domain, rng: &mut ChaCha8Rng) -> [f64; 2] {
    loop {
        let mut p = [0.0; 2];
        for axis in 0..domain.dim {
            let [lo, hi] = domain.bounds[axis];
            p[axis] = rng.random_range(lo..hi);
        }
        if domain.contains(p) {
            return p;
        }
    }
}

/// Euler–Maruyama for `dX = ∇f dt + √(2f) dW` with folding reflection,
/// started uniformly and observed every `D`.
pub fn simulate(grid: &Grid, f: &DiffusivityField, cfg: SimConfig) -> Result<TrajectorySample> {
    if f.grid_id() != grid.id() {
        return Err(LabError::GridMismatch {
            expected: grid.id(),
            found: f.grid_id(),
        });
    }
    if !(cfg.d_time > 0.0) {
        return Err(LabError::Precondition(format!(
            "D = {} must be positive",
            cfg.d_time
        )));
    }
    if !(cfg.dt > 0.0) || cfg.dt > cfg.d_time / 50.0 {
        return Err(LabError::Precondition(format!(
            "dt = {} must lie in (0, D/50 = {}]",
            cfg.dt,
            cfg.d_time / 50.0
        )));
    }
    let steps = (cfg.d_time / cfg.dt).ceil() as usize;
    let dt = cfg.d_time / steps as f64;
    let interp = Interpolator::new(grid)?;
    let grad = grid.gradient(f.values());
    let gx: Vec<f64> = grad.iter().map(|g| g[0]).collect();
    let gy: Vec<f64> = grad.iter().map(|g| g[1]).collect();
    let domain = grid.domain();
    let dim = grid.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x = uniform_point(domain, &mut rng);
    let mut positions = Vec::with_capacity(cfg.n_obs + 1);
    positions.push(x);
    let mut reflections = 0u64;
    let sdt = dt.sqrt();
    for _ in 0..cfg.n_obs {
        for _ in 0..steps {
            let st = interp.stencil(x);
            let fx = apply_stencil(&st, f.values()).max(0.0);
            let drift = [apply_stencil(&st, &gx), apply_stencil(&st, &gy)];
            let amp = (2.0 * fx).sqrt() * sdt;
            let mut y = x;
            for axis in 0..dim {
                let xi: f64 = rng.sample(StandardNormal);
                y[axis] += drift[axis] * dt + amp * xi;
            }
            let z = reflect(y, domain)?;
            if z != y {
                reflections += 1;
            }
            if !domain.contains(z) {
                return Err(LabError::Precondition(format!(
                    "reflected point {z:?} left the domain"
                )));
            }
            x = z;
        }
        positions.push(x);
    }
    Ok(TrajectorySample {
        times: (0..=cfg.n_obs).map(|i| i as f64 * cfg.d_time).collect(),
        positions,
        seed: cfg.seed,
        dt,
        d_time: cfg.d_time,
        reflection_count: reflections,
    })
}

/// Kolmogorov–Smirnov distance of samples from the uniform law on `[lo, hi]`.
pub fn ks_uniform(values: &[f64], lo: f64, hi: f64) -> f64 {
    let mut u: Vec<f64> = values.iter().map(|v| (v - lo) / (hi - lo)).collect();
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    u.iter()
        .enumerate()
        .map(|(i, &x)| ((i as f64 + 1.0) / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max)
}

/// Critical KS value `1.63/√N` at the 1% level.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct HistogramCell {
    pub from_bin: usize,
    pub to_bin: usize,
    pub empirical: f64,
    pub expected: f64,
    pub standard_error: f64,
}

impl HistogramCell {
    pub fn z_score(&self) -> f64 {
        (self.empirical - self.expected).abs() / self.standard_error
    }
}

/// Fractions of each node's quadrature cell that fall in each bin; nodes on
/// a bin edge are split evenly.
fn bin_fractions(grid: &Grid, bins: usize) -> Vec<Vec<(usize, f64)>> {
    let [lo, hi] = grid.domain().bounds[0];
    let width = (hi - lo) / bins as f64;
    grid.nodes()
        .iter()
        .map(|p| {
            let u = (p[0] - lo) / width;
            let r = u.round();
            if (u - r).abs() < 1e-9 && r > 0.0 && (r as usize) < bins {
                vec![(r as usize - 1, 0.5), (r as usize, 0.5)]
            } else {
                vec![((u.floor() as usize).min(bins - 1), 1.0)]
            }
        })
        .collect()
}

/// Histogram of consecutive pairs `(X_{iD}, X_{(i+1)D})` on the interval
/// against the quadrature of the transition density over each cell.
pub fn histogram_vs_density(
    grid: &Grid,
    sample: &TrajectorySample,
    density: &TransitionDensity,
    bins: usize,
) -> Result<Vec<HistogramCell>> {
    if grid.dim() != 1 {
        return Err(LabError::Precondition(
            "pair histograms are implemented on the interval".into(),
        ));
    }
    let n_pairs = sample.transitions();
    if n_pairs == 0 {
        return Err(LabError::Precondition(
            "no transitions in the sample".into(),
        ));
    }
    let [lo, hi] = grid.domain().bounds[0];
    let bin_of = |x: f64| (((x - lo) / (hi - lo) * bins as f64).floor() as usize).min(bins - 1);
    let mut counts = vec![0usize; bins * bins];
    for w in sample.positions.windows(2) {
        counts[bin_of(w[0][0]) * bins + bin_of(w[1][0])] += 1;
    }
    let fr = bin_fractions(grid, bins);
    let w = grid.weights();
    let vol = grid.total_weight();
    let mut expected = vec![0.0; bins * bins];
    for i in 0..grid.len() {
        for j in 0..grid.len() {
            let m = w[i] * w[j] * density.values[(i, j)] / vol;
            for &(a, fa) in &fr[i] {
                for &(b, fb) in &fr[j] {
                    expected[a * bins + b] += m * fa * fb;
                }
            }
        }
    }
    let n = n_pairs as f64;
    Ok((0..bins * bins)
        .map(|c| {
            let p = expected[c];
            HistogramCell {
                from_bin: c / bins,
                to_bin: c % bins,
                empirical: counts[c] as f64 / n,
                expected: p,
                standard_error: (p * (1.0 - p) / n).sqrt(),
            }
        })
        .collect())
}

/// `M̂_{l,k}`, `0 ≤ l, k ≤ J`, estimating `⟨e_l, P_{D,f} e_k⟩` in a known basis.
#[derive(Clone, Debug)]
pub struct SpectralEstimate {
    pub entries: Mat<f64>,
    /// Naive standard errors treating the summands as independent.
    pub standard_errors: Mat<f64>,
    pub truncation: usize,
    pub samples: usize,
}

fn check_basis(grid: &Grid, reference: &EigenSystem, j: usize) -> Result<()> {
    if reference.grid_id() != grid.id() {
        return Err(LabError::GridMismatch {
            expected: grid.id(),
            found: reference.grid_id(),
        });
    }
    if j + 1 > reference.count() {
        return Err(LabError::Truncation(format!(
            "basis has {} modes, J = {j} needs {}",
            reference.count(),
            j + 1
        )));
    }
    Ok(())
}

/// `M̂_{l,k} = (|O|/N) Σᵢ e_l(X_{iD}) e_k(X_{(i+1)D})`.
pub fn estimate_transition(
    grid: &Grid,
    sample: &TrajectorySample,
    reference: &EigenSystem,
    j: usize,
) -> Result<SpectralEstimate> {
    check_basis(grid, reference, j)?;
    let n = sample.transitions();
    if n < 100 {
        return Err(LabError::Precondition(format!(
            "need at least 100 transitions, got {n}"
        )));
    }
    let domain = grid.domain();
    if let Some(p) = sample.positions.iter().find(|p| !domain.contains(**p)) {
        return Err(LabError::Precondition(format!(
            "sample point {p:?} outside the domain"
        )));
    }
    let interp = Interpolator::new(grid)?;
    let evals: Vec<Vec<f64>> = sample
        .positions
        .iter()
        .map(|&p| {
            let st = interp.stencil(p);
            (0..=j)
                .map(|k| apply_stencil(&st, reference.mode(k)))
                .collect()
        })
        .collect();
    let scale = grid.total_weight() / n as f64;
    let vol = grid.total_weight();
    let entries = Mat::from_fn(j + 1, j + 1, |l, k| {
        evals.windows(2).map(|w| w[0][l] * w[1][k]).sum::<f64>() * scale
    });
    let standard_errors = Mat::from_fn(j + 1, j + 1, |l, k| {
        let m = entries[(l, k)];
        let var = evals
            .windows(2)
            .map(|w| (vol * w[0][l] * w[1][k] - m).powi(2))
            .sum::<f64>()
            / (n as f64 - 1.0);
        (var / n as f64).sqrt()
    });
    Ok(SpectralEstimate {
        entries,
        standard_errors,
        truncation: j,
        samples: n,
    })
}

/// Quadrature limit of the estimator: `Σᵢⱼ wᵢ wⱼ e_l(xᵢ) p(xᵢ, yⱼ) e_k(yⱼ)`.
pub fn population_transition(
    grid: &Grid,
    density: &TransitionDensity,
    reference: &EigenSystem,
    j: usize,
) -> Result<Mat<f64>> {
    check_basis(grid, reference, j)?;
    let w = grid.weights();
    let n = grid.len();
    let basis = Mat::from_fn(n, j + 1, |i, k| reference.mode(k)[i] * w[i]);
    let pb = linalg::matmul(&density.values, &basis);
    Ok(linalg::matmul_tn(&basis, &pb))
}

/// `⟨e_l, P_{D,f} e_k⟩` from an eigensystem of `f`.
pub fn true_transition(
    grid: &Grid,
    es_f: &EigenSystem,
    reference: &EigenSystem,
    j: usize,
    d: f64,
) -> Result<Mat<f64>> {
    check_basis(grid, reference, j)?;
    if es_f.grid_id() != grid.id() {
        return Err(LabError::GridMismatch {
            expected: grid.id(),
            found: es_f.grid_id(),
        });
    }
    let tail = spectral_tail_bound(es_f, grid.dim(), grid.len(), d);
    if tail > 1e-9 {
        return Err(LabError::Truncation(format!(
            "spectral tail {tail:e} too large at D = {d}"
        )));
    }
    let w = grid.weights();
    let c = Mat::from_fn(es_f.count(), j + 1, |m, k| {
        weighted_dot(w, es_f.mode(m), reference.mode(k)) * (-0.5 * d * es_f.eigenvalue(m)).exp()
    });
    Ok(linalg::matmul_tn(&c, &c))
}

/// `‖Λ (M̂ − M) Λ⁻¹‖₂` on the mean-zero block, `Λ = diag(λ_k)` of the basis.
pub fn weighted_estimation_error(
    estimate: &Mat<f64>,
    truth: &Mat<f64>,
    reference: &EigenSystem,
) -> Result<f64> {
    let j = estimate.nrows() - 1;
    let n = Mat::from_fn(j, j, |l, k| {
        reference.eigenvalue(l + 1) * (estimate[(l + 1, k + 1)] - truth[(l + 1, k + 1)])
            / reference.eigenvalue(k + 1)
    });
    linalg::spectral_norm(&n)
}

pub fn frobenius_error(estimate: &Mat<f64>, truth: &Mat<f64>) -> f64 {
    let mut s = 0.0;
    for l in 0..estimate.nrows() {
        for k in 0..estimate.ncols() {
            s += (estimate[(l, k)] - truth[(l, k)]).powi(2);
        }
    }
    s.sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RiskRow {
    pub n: usize,
    pub mean_error: f64,
    pub standard_error: f64,
    pub seeds: usize,
}

/// Settings shared by every trajectory of a risk sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiskSetup {
    pub d_time: f64,
    pub dt: f64,
    pub truncation: usize,
    pub seeds: usize,
    pub base_seed: u64,
}

/// Mean weighted estimation error over seeds for each sample size.
pub fn risk_curve(
    grid: &Grid,
    f: &DiffusivityField,
    es_f: &EigenSystem,
    reference: &EigenSystem,
    setup: RiskSetup,
    n_list: &[usize],
) -> Result<Vec<RiskRow>> {
    let truth = true_transition(grid, es_f, reference, setup.truncation, setup.d_time)?;
    n_list
        .iter()
        .map(|&n| {
            let errors = (0..setup.seeds)
                .into_par_iter()
                .map(|s| {
                    let sample = simulate(
                        grid,
                        f,
                        SimConfig {
                            d_time: setup.d_time,
                            n_obs: n,
                            dt: setup.dt,
                            seed: setup.base_seed.wrapping_add(s as u64),
                        },
                    )?;
                    let est = estimate_transition(grid, &sample, reference, setup.truncation)?;
                    weighted_estimation_error(&est.entries, &truth, reference)
                })
                .collect::<Result<Vec<f64>>>()?;
            let k = errors.len() as f64;
            let mean = errors.iter().sum::<f64>() / k;
            let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
            Ok(RiskRow {
                n,
                mean_error: mean,
                standard_error: (var / k).sqrt(),
                seeds: setup.seeds,
            })
        })
        .collect()
}

/// Least-squares slope of `log(mean_error)` against `log(n)`.
pub fn log_log_slope(rows: &[RiskRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.n as f64).ln(), r.mean_error.ln()))
        .collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Trajectory dump: `i,t,x` (and `y` in two dimensions).
pub fn write_trajectory(sample: &TrajectorySample, dim: usize) -> String {
    let mut s = String::from(if dim == 2 { "i,t,x,y\n" } else { "i,t,x\n" });
    for (i, (t, p)) in sample.times.iter().zip(&sample.positions).enumerate() {
        if dim == 2 {
            let _ = writeln!(s, "{i},{t},{},{}", p[0], p[1]);
        } else {
            let _ = writeln!(s, "{i},{t},{}", p[0]);
        }
    }
    s
}

/// Estimate dump: `l,k,value`.
pub fn write_estimate(est: &SpectralEstimate) -> String {
    let mut s = String::from("l,k,value\n");
    for l in 0..est.entries.nrows() {
        for k in 0..est.entries.ncols() {
            let _ = writeln!(s, "{l},{k},{}", est.entries[(l, k)]);
        }
    }
    s
}
