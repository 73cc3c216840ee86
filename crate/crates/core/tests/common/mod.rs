#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steklab::assembly::{assemble_boundary_mass, assemble_operator, CoefficientField};
use steklab::linalg::{SparseMatrixC, Symmetry};
use steklab::mesh::{build_structured_mesh, DomainKind, DomainSpec, EdgeTag, TriMesh};
use steklab::C64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

/// Complex symmetric sparse matrix with the given off-diagonal density plus
/// `shift·I`.
pub fn random_complex_symmetric(rng: &mut ChaCha8Rng, n: usize, density: f64, shift: f64) -> SparseMatrixC {
    let mut t = Vec::new();
    for i in 0..n {
        t.push((
            i,
            i,
            c(shift + rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        ));
        for j in 0..i {
            if rng.random_bool(density) {
                let v = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                t.push((i, j, v));
                t.push((j, i, v));
            }
        }
    }
    SparseMatrixC::from_triplets(n, &t, Symmetry::ComplexSymmetric).unwrap()
}

pub fn mesh(kind: DomainKind, n: usize) -> Arc<TriMesh> {
    Arc::new(build_structured_mesh(DomainSpec::new(kind), n).unwrap())
}

pub fn pencil(mesh: &TriMesh, n: C64) -> (SparseMatrixC, SparseMatrixC) {
    let coeff = CoefficientField::constant(1.0, n).unwrap();
    (
        assemble_operator(mesh, &coeff).unwrap(),
        assemble_boundary_mass(mesh, &EdgeTag::PHYSICAL).unwrap(),
    )
}

pub fn max_dense_diff(a: &[Vec<C64>], b: &[Vec<C64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(r, s)| r.iter().zip(s).map(|(x, y)| (x - y).norm()))
        .fold(0.0, f64::max)
}

pub fn rel_err(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}
