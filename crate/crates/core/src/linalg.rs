//! Thin wrappers over `faer` dense kernels.
//!
//! All kernels run sequentially so that results are bit-reproducible
//! regardless of the host thread count. Parallelism lives one level up,
//! across independent solves.

use std::sync::Once;

use faer::{Mat, Par, Side};

use crate::error::{LabError, Result};

static SEQUENTIAL: Once = Once::new();

pub(crate) fn ensure_sequential() {
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(Par::Seq));
}

/// Eigenpairs of a symmetric matrix, eigenvalues ascending, eigenvectors as columns.
pub fn symmetric_eigen(a: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    ensure_sequential();
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| LabError::Eigensolver(format!("{e:?}")))?;
    let values = evd.S().column_vector().iter().copied().collect();
    Ok((values, evd.U().to_owned()))
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(a: &Mat<f64>) -> Result<Vec<f64>> {
    ensure_sequential();
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| LabError::Eigensolver(format!("{e:?}")))
}

/// Largest singular value.
pub fn spectral_norm(a: &Mat<f64>) -> Result<f64> {
    ensure_sequential();
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0.0);
    }
    let s = a
        .singular_values()
        .map_err(|e| LabError::Eigensolver(format!("{e:?}")))?;
    Ok(s.first().copied().unwrap_or(0.0))
}

/// Singular values, nonincreasing.
pub fn singular_values(a: &Mat<f64>) -> Result<Vec<f64>> {
    ensure_sequential();
    a.singular_values()
        .map_err(|e| LabError::Eigensolver(format!("{e:?}")))
}

pub fn matmul(a: &Mat<f64>, b: &Mat<f64>) -> Mat<f64> {
    ensure_sequential();
    a * b
}

/// `aᵀ b`.
pub fn matmul_tn(a: &Mat<f64>, b: &Mat<f64>) -> Mat<f64> {
    ensure_sequential();
    a.transpose() * b
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
