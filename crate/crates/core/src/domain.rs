//! Domains, tensor-product grids, quadrature and nodal scalar fields.
//!
//! Three geometries are supported: an interval, an axis-aligned rectangle and
//! a disk centred at the origin. Interval and rectangle use uniform lattices
//! with trapezoidal weights. The disk uses the Cartesian lattice of its
//! bounding square masked to the closed disk; each node owns the part of its
//! lattice cell that lies inside the disk, and slivers of cells whose node
//! falls outside are handed to the nearest interior node.
//!
//! Every grid also carries its flux faces: pairs of lattice neighbours with
//! the geometric coefficient `face length / node distance`. The Neumann
//! operator is assembled from these faces only, so boundaries carry no flux.

use std::fmt::Write as _;

use crate::error::{LabError, Result};
use crate::hash::digest64;

/// Supersampling factor per axis used for cut-cell areas on the disk.
const DISK_SUBSAMPLES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DomainKind {
    Interval,
    Rectangle,
    Disk,
}

impl DomainKind {
    pub fn dim(self) -> usize {
        match self {
            DomainKind::Interval => 1,
            DomainKind::Rectangle | DomainKind::Disk => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DomainKind::Interval => "interval",
            DomainKind::Rectangle => "rectangle",
            DomainKind::Disk => "disk",
        }
    }
}

impl std::str::FromStr for DomainKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "interval" => Ok(DomainKind::Interval),
            "rectangle" | "square" => Ok(DomainKind::Rectangle),
            "disk" => Ok(DomainKind::Disk),
            other => Err(LabError::InvalidDomain(format!(
                "unknown domain kind `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for DomainKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Which part of the domain an integral runs over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    Full,
    /// The compact inner set: points at distance at least `margin` from the boundary.
    Inner,
}

/// A bounded convex domain together with the margin defining its inner set.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    pub kind: DomainKind,
    /// Closed extent per axis. For the disk this is `[-R, R]` on both axes.
    pub bounds: Vec<[f64; 2]>,
    pub dim: usize,
    pub volume: f64,
    pub margin: f64,
}

impl Domain {
    pub fn radius(&self) -> Option<f64> {
        match self.kind {
            DomainKind::Disk => Some(0.5 * (self.bounds[0][1] - self.bounds[0][0])),
            _ => None,
        }
    }

    pub fn center(&self) -> [f64; 2] {
        let mut c = [0.0; 2];
        for (axis, b) in self.bounds.iter().enumerate() {
            c[axis] = 0.5 * (b[0] + b[1]);
        }
        c
    }

    pub fn smallest_extent(&self) -> f64 {
        self.bounds
            .iter()
            .map(|b| b[1] - b[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Flat extents in the form accepted by [`build_domain`].
    pub fn extents(&self) -> Vec<f64> {
        match self.kind {
            DomainKind::Interval => vec![self.bounds[0][0], self.bounds[0][1]],
            DomainKind::Rectangle => vec![
                self.bounds[0][0],
                self.bounds[0][1],
                self.bounds[1][0],
                self.bounds[1][1],
            ],
            DomainKind::Disk => vec![self.radius().unwrap_or(0.0)],
        }
    }

    /// Euclidean distance from an interior point to the boundary; negative outside.
    pub fn distance_to_boundary(&self, p: [f64; 2]) -> f64 {
        match self.kind {
            DomainKind::Interval => (p[0] - self.bounds[0][0]).min(self.bounds[0][1] - p[0]),
            DomainKind::Rectangle => (p[0] - self.bounds[0][0])
                .min(self.bounds[0][1] - p[0])
                .min(p[1] - self.bounds[1][0])
                .min(self.bounds[1][1] - p[1]),
            DomainKind::Disk => {
                let r = self.radius().unwrap_or(0.0);
                r - (p[0] * p[0] + p[1] * p[1]).sqrt()
            }
        }
    }

    /// Membership in the closure of the domain, with a relative tolerance.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.distance_to_boundary(p) >= -1e-12 * self.smallest_extent()
    }

    pub fn in_inner_set(&self, p: [f64; 2]) -> bool {
        self.distance_to_boundary(p) >= self.margin * (1.0 - 1e-9)
    }
}

/// Flux face between two neighbouring nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Face {
    pub a: usize,
    pub b: usize,
    pub axis: usize,
    /// Face measure divided by node distance.
    pub coef: f64,
}

/// Neighbour slots: `[-x, +x, -y, +y]`.
pub type Neighbors = [Option<usize>; 4];

/// Discretization of a [`Domain`].
#[derive(Clone, Debug)]
pub struct Grid {
    domain: Domain,
    resolution: usize,
    spacing: [f64; 2],
    lattice_dims: [usize; 2],
    nodes: Vec<[f64; 2]>,
    lattice: Vec<[usize; 2]>,
    node_at: Vec<Option<usize>>,
    weights: Vec<f64>,
    boundary: Vec<bool>,
    inner: Vec<bool>,
    neighbors: Vec<Neighbors>,
    faces: Vec<Face>,
    id: u64,
}

/// Builds a domain and its grid.
///
/// `extents` is `[lo, hi]` for an interval, `[x0, x1, y0, y1]` for a
/// rectangle and `[radius]` for a disk centred at the origin. `resolution`
/// is the number of cells per axis (across the diameter for the disk).
pub fn build_domain(
    kind: DomainKind,
    extents: &[f64],
    resolution: usize,
    margin: f64,
) -> Result<(Domain, Grid)> {
    if extents.iter().any(|e| !e.is_finite()) {
        return Err(LabError::InvalidDomain("non-finite extent".into()));
    }
    let bounds: Vec<[f64; 2]> = match kind {
        DomainKind::Interval => {
            if extents.len() != 2 {
                return Err(dimension_error(kind, extents.len(), 2));
            }
            vec![[extents[0], extents[1]]]
        }
        DomainKind::Rectangle => {
            if extents.len() != 4 {
                return Err(dimension_error(kind, extents.len(), 4));
            }
            vec![[extents[0], extents[1]], [extents[2], extents[3]]]
        }
        DomainKind::Disk => {
            if extents.len() != 1 {
                return Err(dimension_error(kind, extents.len(), 1));
            }
            let r = extents[0];
            vec![[-r, r], [-r, r]]
        }
    };
    if bounds.iter().any(|b| b[1] <= b[0]) {
        return Err(LabError::InvalidDomain(
            "extents must be increasing and nonempty".into(),
        ));
    }
    if resolution < 16 {
        return Err(LabError::InvalidDomain(format!(
            "resolution {resolution} below the minimum of 16 cells per axis"
        )));
    }
    let dim = kind.dim();
    let volume = match kind {
        DomainKind::Disk => {
            let r = 0.5 * (bounds[0][1] - bounds[0][0]);
            std::f64::consts::PI * r * r
        }
        _ => bounds.iter().map(|b| b[1] - b[0]).product(),
    };
    let domain = Domain {
        kind,
        bounds,
        dim,
        volume,
        margin,
    };
    let half_smallest = 0.5 * domain.smallest_extent();
    if !(margin > 0.0) || margin >= half_smallest {
        return Err(LabError::InvalidDomain(format!(
            "margin {margin} must lie in (0, {half_smallest}) so that the inner set is nonempty"
        )));
    }
    let grid = match kind {
        DomainKind::Disk => Grid::disk(domain, resolution),
        _ => Grid::tensor(domain, resolution),
    };
    if !grid.inner.iter().any(|&b| b) {
        return Err(LabError::InvalidDomain(format!(
            "margin {margin} leaves no grid node in the inner set"
        )));
    }
    Ok((grid.domain.clone(), grid))
}

fn dimension_error(kind: DomainKind, got: usize, want: usize) -> LabError {
    if got > want && kind != DomainKind::Disk {
        LabError::InvalidDomain(format!(
            "{kind} expects {want} extents, got {got}; dimensions above 2 are not supported"
        ))
    } else {
        LabError::InvalidDomain(format!("{kind} expects {want} extents, got {got}"))
    }
}

fn trapezoid_weights(n_cells: usize, h: f64) -> Vec<f64> {
    (0..=n_cells)
        .map(|i| if i == 0 || i == n_cells { 0.5 * h } else { h })
        .collect()
}

/// Length of `[lo, hi] ∩ [-s, s]`.
fn overlap(lo: f64, hi: f64, s: f64) -> f64 {
    (hi.min(s) - lo.max(-s)).max(0.0)
}

impl Grid {
    fn tensor(domain: Domain, n: usize) -> Grid {
        let dim = domain.dim;
        let hx = (domain.bounds[0][1] - domain.bounds[0][0]) / n as f64;
        let hy = if dim == 2 {
            (domain.bounds[1][1] - domain.bounds[1][0]) / n as f64
        } else {
            0.0
        };
        let nx = n + 1;
        let ny = if dim == 2 { n + 1 } else { 1 };
        let wx = trapezoid_weights(n, hx);
        let wy = if dim == 2 {
            trapezoid_weights(n, hy)
        } else {
            vec![1.0]
        };

        let mut nodes = Vec::with_capacity(nx * ny);
        let mut lattice = Vec::with_capacity(nx * ny);
        let mut weights = Vec::with_capacity(nx * ny);
        let mut node_at = vec![None; nx * ny];
        for b in 0..ny {
            for a in 0..nx {
                let x = if a == n {
                    domain.bounds[0][1]
                } else {
                    domain.bounds[0][0] + a as f64 * hx
                };
                let y = if dim == 2 {
                    if b == n {
                        domain.bounds[1][1]
                    } else {
                        domain.bounds[1][0] + b as f64 * hy
                    }
                } else {
                    0.0
                };
                node_at[a + b * nx] = Some(nodes.len());
                nodes.push([x, y]);
                lattice.push([a, b]);
                weights.push(wx[a] * wy[b]);
            }
        }
        let boundary: Vec<bool> = lattice
            .iter()
            .map(|&[a, b]| a == 0 || a == n || (dim == 2 && (b == 0 || b == n)))
            .collect();

        let mut faces = Vec::new();
        for (i, &[a, b]) in lattice.iter().enumerate() {
            if a + 1 < nx {
                let j = node_at[a + 1 + b * nx].expect("tensor lattice is full");
                faces.push(Face {
                    a: i,
                    b: j,
                    axis: 0,
                    coef: wy[b] / hx,
                });
            }
            if dim == 2 && b + 1 < ny {
                let j = node_at[a + (b + 1) * nx].expect("tensor lattice is full");
                faces.push(Face {
                    a: i,
                    b: j,
                    axis: 1,
                    coef: wx[a] / hy,
                });
            }
        }
        Grid::finish(
            domain,
            n,
            [hx, hy],
            [nx, ny],
            nodes,
            lattice,
            node_at,
            weights,
            boundary,
            faces,
        )
    }

    fn disk(domain: Domain, n: usize) -> Grid {
        let r = domain.radius().expect("disk has a radius");
        let h = 2.0 * r / n as f64;
        let nx = n + 1;
        let coord = |a: usize| (2.0 * a as f64 - n as f64) * (0.5 * h);
        let inside = |x: f64, y: f64| x * x + y * y <= r * r * (1.0 + 1e-12);

        let mut nodes = Vec::new();
        let mut lattice = Vec::new();
        let mut node_at = vec![None; nx * nx];
        for b in 0..nx {
            for a in 0..nx {
                let (x, y) = (coord(a), coord(b));
                if inside(x, y) {
                    node_at[a + b * nx] = Some(nodes.len());
                    nodes.push([x, y]);
                    lattice.push([a, b]);
                }
            }
        }

        // Cut-cell areas by midpoint supersampling; samples in cells whose
        // node lies outside go to the nearest interior node, split evenly
        // on ties so the lattice symmetries survive.
        let mut weights = vec![0.0; nodes.len()];
        let s = DISK_SUBSAMPLES;
        let da = h * h / (s * s) as f64;
        let sub = |c: usize, k: usize| {
            (((2 * c) * s + 2 * k + 1) as f64 - (n * s + s) as f64) * h / (2 * s) as f64
        };
        let mut owners = Vec::new();
        for b in 0..nx {
            for a in 0..nx {
                for q in 0..s {
                    for p in 0..s {
                        let (x, y) = (sub(a, p), sub(b, q));
                        if x * x + y * y > r * r {
                            continue;
                        }
                        if let Some(k) = node_at[a + b * nx] {
                            weights[k] += da;
                            continue;
                        }
                        owners.clear();
                        let mut best = f64::INFINITY;
                        for db in -2i64..=2 {
                            for dx in -2i64..=2 {
                                let (aa, bb) = (a as i64 + dx, b as i64 + db);
                                if aa < 0 || bb < 0 || aa >= nx as i64 || bb >= nx as i64 {
                                    continue;
                                }
                                if let Some(k) = node_at[aa as usize + bb as usize * nx] {
                                    let d = (nodes[k][0] - x).powi(2) + (nodes[k][1] - y).powi(2);
                                    if d < best * (1.0 - 1e-9) {
                                        best = d;
                                        owners.clear();
                                    }
                                    if d <= best * (1.0 + 1e-9) {
                                        owners.push(k);
                                    }
                                }
                            }
                        }
                        let share = da / owners.len().max(1) as f64;
                        for &k in &owners {
                            weights[k] += share;
                        }
                    }
                }
            }
        }

        let boundary: Vec<bool> = nodes
            .iter()
            .map(|p| r - (p[0] * p[0] + p[1] * p[1]).sqrt() < h)
            .collect();

        let mut faces = Vec::new();
        for (i, &[a, b]) in lattice.iter().enumerate() {
            let (x, y) = (coord(a), coord(b));
            if a + 1 < nx {
                if let Some(j) = node_at[a + 1 + b * nx] {
                    let fx = x + 0.5 * h;
                    let half = (r * r - fx * fx).max(0.0).sqrt();
                    let len = overlap(y - 0.5 * h, y + 0.5 * h, half);
                    if len > 0.0 {
                        faces.push(Face {
                            a: i,
                            b: j,
                            axis: 0,
                            coef: len / h,
                        });
                    }
                }
            }
            if b + 1 < nx {
                if let Some(j) = node_at[a + (b + 1) * nx] {
                    let fy = y + 0.5 * h;
                    let half = (r * r - fy * fy).max(0.0).sqrt();
                    let len = overlap(x - 0.5 * h, x + 0.5 * h, half);
                    if len > 0.0 {
                        faces.push(Face {
                            a: i,
                            b: j,
                            axis: 1,
                            coef: len / h,
                        });
                    }
                }
            }
        }
        Grid::finish(
            domain,
            n,
            [h, h],
            [nx, nx],
            nodes,
            lattice,
            node_at,
            weights,
            boundary,
            faces,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        domain: Domain,
        resolution: usize,
        spacing: [f64; 2],
        lattice_dims: [usize; 2],
        nodes: Vec<[f64; 2]>,
        lattice: Vec<[usize; 2]>,
        node_at: Vec<Option<usize>>,
        weights: Vec<f64>,
        boundary: Vec<bool>,
        faces: Vec<Face>,
    ) -> Grid {
        let inner = nodes
            .iter()
            .zip(&boundary)
            .map(|(p, &on_boundary)| !on_boundary && domain.in_inner_set(*p))
            .collect();
        let nx = lattice_dims[0];
        let lookup = |a: i64, b: i64| -> Option<usize> {
            if a < 0 || b < 0 || a >= nx as i64 || b >= lattice_dims[1] as i64 {
                None
            } else {
                node_at[a as usize + b as usize * nx]
            }
        };
        let neighbors = lattice
            .iter()
            .map(|&[a, b]| {
                let (a, b) = (a as i64, b as i64);
                [
                    lookup(a - 1, b),
                    lookup(a + 1, b),
                    lookup(a, b - 1),
                    lookup(a, b + 1),
                ]
            })
            .collect();
        let id = digest64(header_text(&domain, resolution).as_bytes());
        Grid {
            domain,
            resolution,
            spacing,
            lattice_dims,
            nodes,
            lattice,
            node_at,
            weights,
            boundary,
            inner,
            neighbors,
            faces,
            id,
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn spacing(&self) -> [f64; 2] {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    pub fn inner_mask(&self) -> &[bool] {
        &self.inner
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn neighbors(&self, node: usize) -> Neighbors {
        self.neighbors[node]
    }

    pub fn lattice_dims(&self) -> [usize; 2] {
        self.lattice_dims
    }

    pub fn lattice_index(&self, node: usize) -> [usize; 2] {
        self.lattice[node]
    }

    /// Node at a lattice position, if that position belongs to the grid.
    pub fn node_at(&self, a: usize, b: usize) -> Option<usize> {
        if a >= self.lattice_dims[0] || b >= self.lattice_dims[1] {
            return None;
        }
        self.node_at[a + b * self.lattice_dims[0]]
    }

    /// Coordinates of lattice position `(a, b)`, whether or not it is a node.
    pub fn lattice_point(&self, a: usize, b: usize) -> [f64; 2] {
        let x = self.domain.bounds[0][0] + a as f64 * self.spacing[0];
        let y = if self.dim() == 2 {
            self.domain.bounds[1][0] + b as f64 * self.spacing[1]
        } else {
            0.0
        };
        [x, y]
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn field_from_fn(&self, f: impl Fn([f64; 2]) -> f64) -> ScalarField {
        ScalarField {
            values: self.nodes.iter().map(|&p| f(p)).collect(),
            grid_id: self.id,
        }
    }

    pub fn constant(&self, c: f64) -> ScalarField {
        ScalarField {
            values: vec![c; self.len()],
            grid_id: self.id,
        }
    }

    pub fn zeros(&self) -> ScalarField {
        self.constant(0.0)
    }

    pub fn field(&self, values: Vec<f64>) -> Result<ScalarField> {
        ScalarField::new(self, values)
    }

    pub fn check(&self, u: &ScalarField) -> Result<()> {
        if u.grid_id != self.id {
            return Err(LabError::GridMismatch {
                expected: self.id,
                found: u.grid_id,
            });
        }
        Ok(())
    }

    /// Discrete gradient: centred differences, one-sided where a neighbour is missing.
    pub fn gradient(&self, values: &[f64]) -> Vec<[f64; 2]> {
        (0..self.len())
            .map(|i| self.gradient_at(values, i))
            .collect()
    }

    pub fn gradient_at(&self, values: &[f64], i: usize) -> [f64; 2] {
        let nb = self.neighbors[i];
        let mut g = [0.0; 2];
        for axis in 0..self.dim() {
            let h = self.spacing[axis];
            g[axis] = match (nb[2 * axis], nb[2 * axis + 1]) {
                (Some(m), Some(p)) => (values[p] - values[m]) / (2.0 * h),
                (None, Some(p)) => (values[p] - values[i]) / h,
                (Some(m), None) => (values[i] - values[m]) / h,
                (None, None) => 0.0,
            };
        }
        g
    }

    /// Second differences `(∂xx, ∂yy, ∂xy)` at nodes whose full stencil exists.
    pub fn second_differences_at(&self, values: &[f64], i: usize) -> Option<[f64; 3]> {
        let nb = self.neighbors[i];
        let [hx, hy] = self.spacing;
        let (xm, xp) = (nb[0]?, nb[1]?);
        let dxx = (values[xp] - 2.0 * values[i] + values[xm]) / (hx * hx);
        if self.dim() == 1 {
            return Some([dxx, 0.0, 0.0]);
        }
        let (ym, yp) = (nb[2]?, nb[3]?);
        let dyy = (values[yp] - 2.0 * values[i] + values[ym]) / (hy * hy);
        let pp = self.neighbors[xp][3]?;
        let pm = self.neighbors[xp][2]?;
        let mp = self.neighbors[xm][3]?;
        let mm = self.neighbors[xm][2]?;
        let dxy = (values[pp] - values[pm] - values[mp] + values[mm]) / (4.0 * hx * hy);
        Some([dxx, dyy, dxy])
    }

    /// Largest second difference over nodes with a full stencil, optionally
    /// restricted to the inner set.
    pub fn sup_second_differences(&self, values: &[f64], region: Region) -> f64 {
        (0..self.len())
            .filter(|&i| region == Region::Full || self.inner[i])
            .filter_map(|i| self.second_differences_at(values, i))
            .map(|d| d.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .fold(0.0, f64::max)
    }

    /// Finite-difference Sobolev norm of order `k ∈ {0, 1, 2}`.
    pub fn fd_sobolev_norm(&self, values: &[f64], k: usize) -> f64 {
        let mut total = 0.0;
        for i in 0..self.len() {
            let w = self.weights[i];
            let mut s = values[i] * values[i];
            if k >= 1 {
                let g = self.gradient_at(values, i);
                s += g[0] * g[0] + g[1] * g[1];
            }
            if k >= 2 {
                if let Some([xx, yy, xy]) = self.second_differences_at(values, i) {
                    s += xx * xx + yy * yy + 2.0 * xy * xy;
                }
            }
            total += w * s;
        }
        total.sqrt()
    }

    /// Header lines of the flat text format, also the source of the grid id.
    pub fn header(&self) -> String {
        header_text(&self.domain, self.resolution)
    }
}

fn header_text(domain: &Domain, resolution: usize) -> String {
    let mut s = String::new();
    let extents: Vec<String> = domain.extents().iter().map(|e| format!("{e}")).collect();
    let _ = writeln!(s, "kind {}", domain.kind);
    let _ = writeln!(s, "extents {}", extents.join(" "));
    let _ = writeln!(s, "resolution {resolution}");
    let _ = writeln!(s, "margin {}", domain.margin);
    s
}

/// Real values on the nodes of one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
    grid_id: u64,
}

impl ScalarField {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LabError::InvalidField(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(LabError::InvalidField(format!(
                "non-finite value at node {i}"
            )));
        }
        Ok(ScalarField {
            values,
            grid_id: grid.id(),
        })
    }

    pub(crate) fn from_parts(values: Vec<f64>, grid_id: u64) -> Self {
        ScalarField { values, grid_id }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn grid_id(&self) -> u64 {
        self.grid_id
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            values: self.values.iter().map(|&v| f(v)).collect(),
            grid_id: self.grid_id,
        }
    }

    pub fn scaled(&self, c: f64) -> ScalarField {
        self.map(|v| c * v)
    }

    fn same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid_id != other.grid_id {
            return Err(LabError::GridMismatch {
                expected: self.grid_id,
                found: other.grid_id,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &ScalarField) -> Result<ScalarField> {
        self.same_grid(other)?;
        Ok(ScalarField {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
            grid_id: self.grid_id,
        })
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        self.same_grid(other)?;
        Ok(ScalarField {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
            grid_id: self.grid_id,
        })
    }
}

/// Weighted inner product `Σ u v w`.
pub fn l2_inner(grid: &Grid, u: &ScalarField, v: &ScalarField) -> Result<f64> {
    grid.check(u)?;
    grid.check(v)?;
    Ok(weighted_dot(grid.weights(), u.values(), v.values()))
}

pub fn l2_norm(grid: &Grid, u: &ScalarField) -> Result<f64> {
    Ok(l2_inner(grid, u, u)?.sqrt())
}

/// Mean value `⟨u, 1⟩ / |O|` under the grid quadrature.
pub fn mean(grid: &Grid, u: &ScalarField) -> Result<f64> {
    grid.check(u)?;
    Ok(weighted_dot(grid.weights(), u.values(), &vec![1.0; u.len()]) / grid.total_weight())
}

/// `Σ |u| w` over the full grid or the inner set.
pub fn restrict_l1(grid: &Grid, u: &ScalarField, region: Region) -> Result<f64> {
    grid.check(u)?;
    let inner = grid.inner_mask();
    Ok(u.values()
        .iter()
        .zip(grid.weights())
        .enumerate()
        .filter(|(i, _)| region == Region::Full || inner[*i])
        .map(|(_, (v, w))| v.abs() * w)
        .sum())
}

pub(crate) fn weighted_dot(w: &[f64], u: &[f64], v: &[f64]) -> f64 {
    w.iter().zip(u).zip(v).map(|((w, a), b)| w * a * b).sum()
}

/// Serializes a grid (and optionally one field) to the flat text format:
/// a header followed by one `x y weight boundary inner value` record per node.
pub fn write_grid_text(grid: &Grid, field: Option<&ScalarField>) -> Result<String> {
    if let Some(u) = field {
        grid.check(u)?;
    }
    let mut s = String::from("# neumann-lab grid v1\n");
    s.push_str(&grid.header());
    let _ = writeln!(s, "nodes {}", grid.len());
    s.push_str("x y weight boundary inner value\n");
    for i in 0..grid.len() {
        let p = grid.nodes[i];
        let value = field.map(|u| u.values()[i]).unwrap_or(0.0);
        let _ = writeln!(
            s,
            "{} {} {} {} {} {}",
            p[0],
            p[1],
            grid.weights[i],
            u8::from(grid.boundary[i]),
            u8::from(grid.inner[i]),
            value
        );
    }
    Ok(s)
}

/// Parses the flat text format, rebuilding the grid from its header and
/// checking every node record against it.
pub fn read_grid_text(text: &str) -> Result<(Grid, ScalarField)> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let mut take = |key: &str| -> Result<String> {
        let line = lines
            .next()
            .ok_or_else(|| LabError::Parse(format!("missing `{key}` line")))?;
        line.strip_prefix(key)
            .map(|rest| rest.trim().to_string())
            .ok_or_else(|| LabError::Parse(format!("expected `{key}`, found `{line}`")))
    };
    let kind: DomainKind = take("kind")?.parse()?;
    let extents = parse_floats(&take("extents")?)?;
    let resolution: usize = take("resolution")?
        .parse()
        .map_err(|e| LabError::Parse(format!("resolution: {e}")))?;
    let margin: f64 = take("margin")?
        .parse()
        .map_err(|e| LabError::Parse(format!("margin: {e}")))?;
    let count: usize = take("nodes")?
        .parse()
        .map_err(|e| LabError::Parse(format!("nodes: {e}")))?;
    let columns = lines
        .next()
        .ok_or_else(|| LabError::Parse("missing column header".into()))?;
    if columns.split_whitespace().count() != 6 {
        return Err(LabError::Parse(format!(
            "unexpected column header `{columns}`"
        )));
    }
    let (_, grid) = build_domain(kind, &extents, resolution, margin)?;
    if count != grid.len() {
        return Err(LabError::Parse(format!(
            "header declares {count} nodes, rebuilt grid has {}",
            grid.len()
        )));
    }
    let mut values = Vec::with_capacity(count);
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec = parse_floats(line)?;
        if rec.len() != 6 || i >= count {
            return Err(LabError::Parse(format!("bad node record `{line}`")));
        }
        let p = grid.nodes[i];
        if rec[0] != p[0] || rec[1] != p[1] || rec[2] != grid.weights[i] {
            return Err(LabError::Parse(format!(
                "node {i} does not match the rebuilt grid"
            )));
        }
        values.push(rec[5]);
    }
    let field = ScalarField::new(&grid, values)?;
    Ok((grid, field))
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| LabError::Parse(format!("`{t}`: {e}")))
        })
        .collect()
}
