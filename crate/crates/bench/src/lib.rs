//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use steklab::assembly::CoefficientField;
use steklab::mesh::{build_structured_mesh, refine_levels, DomainKind, DomainSpec, TriMesh};
use steklab::C64;

pub fn mesh(kind: DomainKind, intervals: usize) -> Arc<TriMesh> {
    Arc::new(build_structured_mesh(DomainSpec::new(kind), intervals).expect("valid benchmark grid"))
}

/// Coarse mesh and its `steps`-times refined descendant.
pub fn nested(kind: DomainKind, intervals: usize, steps: usize) -> (Arc<TriMesh>, Arc<TriMesh>) {
    let coarse = mesh(kind, intervals);
    let fine = refine_levels(&coarse, steps)
        .expect("refinement")
        .pop()
        .expect("one level");
    (coarse, fine)
}

pub fn coefficients(n_im: f64) -> CoefficientField {
    CoefficientField::constant(1.0, C64::new(4.0, n_im)).expect("valid coefficients")
}
