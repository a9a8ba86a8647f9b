//! Numerical laboratory for divergence-form diffusions with reflecting
//! (Neumann) boundaries.
//!
//! The crate discretizes `∇·(f∇)` on an interval, a rectangle or a disk,
//! computes its spectrum and heat semigroup, and provides audits for the
//! perturbation theory, stability estimates and minimax constructions
//! built on top of it, plus a reflected-SDE simulator and a transition
//! operator estimator.

// `!(a <= b)` is used on purpose so that NaN fails every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bumps;
pub mod domain;
pub mod error;
pub mod experiment;
pub mod hash;
pub mod linalg;
pub mod minimax;
pub mod perturbation;
pub mod sim;
pub mod spectral;
pub mod stability;

pub use domain::{build_domain, Domain, DomainKind, Grid, Region, ScalarField};
pub use error::{LabError, Result};
pub use spectral::{eigensolve, DiffusivityField, EigenSystem};
