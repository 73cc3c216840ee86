//! Finite-element solver for the Stekloff eigenvalue problem
//!
//! ```text
//! Δu + k² n(x) u = 0   in Ω,
//! ∂u/∂ν + λ u = 0      on ∂Ω,
//! ```
//!
//! with a complex index of refraction `n`, discretised with P1 elements on
//! structured triangulations. Besides the direct eigensolve the crate provides
//! two two-grid schemes (an eigensolve on a coarse grid followed by two linear
//! solves on a fine grid and a generalized Rayleigh quotient) and a local
//! defect-correction scheme that refines only around a corner singularity.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod mesh;
pub mod solvers;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

pub use assembly::CoefficientField;
pub use linalg::{PencilEigenSet, SparseMatrixC};
pub use mesh::{DomainKind, DomainSpec, FeFunction, TriMesh};
pub use solvers::{SchemeKind, SchemeResult};
