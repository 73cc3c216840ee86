mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use steklab::assembly::{assemble_mass, assemble_shifted_laplacian, Coefficient};
use steklab::linalg::*;
use steklab::mesh::{DomainKind, EdgeTag};
use steklab::{Error, C64};

fn residual(a: &SparseMatrixC, x: &[C64], b: &[C64]) -> f64 {
    let r: Vec<C64> = a.matvec(x).iter().zip(b).map(|(p, q)| p - q).collect();
    norm2(&r) / norm2(b)
}

#[test]
fn identity_factorization() {
    let f = LuFactorization::new(&SparseMatrixC::identity(5)).unwrap();
    let mut e1 = vec![c(0.0, 0.0); 5];
    e1[0] = c(1.0, 0.0);
    assert_eq!(f.solve(&e1, SolveMode::Normal).unwrap(), e1);
    let d = f.symmetric_factor().unwrap().reconstruct_dense();
    assert_eq!(max_dense_diff(&d, &SparseMatrixC::identity(5).to_dense()), 0.0);
}

#[test]
fn zero_diagonal_needs_pivoting() {
    let a = SparseMatrixC::from_dense(
        &[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]],
        Symmetry::RealSymmetric,
    )
    .unwrap();
    let f = LuFactorization::new(&a).unwrap();
    assert!(!f.is_symmetric());
    let x = f.solve(&[c(2.0, 0.0), c(3.0, 1.0)], SolveMode::Normal).unwrap();
    assert!((x[0] - c(3.0, 1.0)).norm() < 1e-15 && (x[1] - c(2.0, 0.0)).norm() < 1e-15);
}

#[test]
fn singular_matrix_is_reported() {
    let a = SparseMatrixC::from_dense(
        &[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(2.0, 0.0), c(4.0, 0.0)]],
        Symmetry::RealSymmetric,
    )
    .unwrap();
    assert!(matches!(LuFactorization::new(&a), Err(Error::Singular { .. })));
}

#[test]
fn random_complex_symmetric_reconstructs() {
    let mut r = rng(7);
    let a = random_complex_symmetric(&mut r, 200, 0.02, 5.0);
    let f = LuFactorization::new(&a).unwrap();
    let ldlt = f.symmetric_factor().expect("symmetric path");
    let diff = max_dense_diff(&ldlt.reconstruct_dense(), &a.to_dense());
    assert!(diff <= 1e-10 * a.max_abs(), "reconstruction error {diff:e}");
}

#[test]
fn conjugate_transpose_identity() {
    let mut r = rng(8);
    let a = random_complex_symmetric(&mut r, 150, 0.03, 4.0);
    let f = LuFactorization::new(&a).unwrap();
    let b = random_vector(&mut r, 150);
    let adj = f.solve(&b, SolveMode::ConjugateTranspose).unwrap();
    let conj_b: Vec<C64> = b.iter().map(|v| v.conj()).collect();
    let via: Vec<C64> = f
        .solve(&conj_b, SolveMode::Normal)
        .unwrap()
        .iter()
        .map(|v| v.conj())
        .collect();
    let worst = adj.iter().zip(&via).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
    assert!(worst <= 1e-12);
    let r_adj: Vec<C64> = a.matvec_adjoint(&adj).iter().zip(&b).map(|(p, q)| p - q).collect();
    assert!(norm2(&r_adj) / norm2(&b) <= 1e-11);
}

#[test]
fn nonsymmetric_uses_pivoted_lu() {
    let mut r = rng(9);
    let n = 120;
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, c(3.0, 0.5)));
        for j in 0..n {
            if i != j && r.random_bool(0.04) {
                t.push((i, j, c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))));
            }
        }
    }
    let a = SparseMatrixC::from_triplets(n, &t, Symmetry::None).unwrap();
    let f = LuFactorization::new(&a).unwrap();
    assert!(!f.is_symmetric());
    let b = random_vector(&mut r, n);
    let x = f.solve(&b, SolveMode::Normal).unwrap();
    assert!(residual(&a, &x, &b) <= 1e-11);
    let y = f.solve(&b, SolveMode::ConjugateTranspose).unwrap();
    let ry: Vec<C64> = a.matvec_adjoint(&y).iter().zip(&b).map(|(p, q)| p - q).collect();
    assert!(norm2(&ry) / norm2(&b) <= 1e-11);
}

#[test]
fn factor_reuse_is_reproducible() {
    let mut r = rng(10);
    let a = random_complex_symmetric(&mut r, 100, 0.05, 5.0);
    let f = LuFactorization::new(&a).unwrap();
    let b = random_vector(&mut r, 100);
    let first = f.solve(&b, SolveMode::Normal).unwrap();
    let _other = f.solve(&random_vector(&mut r, 100), SolveMode::Normal).unwrap();
    assert_eq!(first, f.solve(&b, SolveMode::Normal).unwrap());
    assert!(matches!(
        f.solve(&b[..99], SolveMode::Normal),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn spd_solves() {
    let m = mesh(DomainKind::Square, 8);
    let s = assemble_shifted_laplacian(&m).unwrap();
    let mass = assemble_mass(&m, &Coefficient::real(1.0)).unwrap();
    let ones = vec![c(1.0, 0.0); m.node_count()];
    let x = spd_solve(&s, &mass.matvec(&ones)).unwrap();
    assert!(x.iter().all(|v| (v - c(1.0, 0.0)).norm() < 1e-11));

    let b = vec![c(1.0, 2.0), c(-3.0, 0.5)];
    assert_eq!(spd_solve(&SparseMatrixC::identity(2), &b).unwrap(), b);

    let mut r = rng(11);
    let n = 300;
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, c(0.0, 0.0)));
        for j in 0..i {
            if r.random_bool(0.02) {
                let v = c(r.random_range(-1.0..1.0), 0.0);
                t.extend([(i, j, v), (j, i, v), (i, i, c(v.norm(), 0.0)), (j, j, c(v.norm(), 0.0))]);
            }
        }
        t.push((i, i, c(0.1, 0.0)));
    }
    let s = SparseMatrixC::from_triplets(n, &t, Symmetry::RealSymmetric).unwrap();
    let b = random_vector(&mut r, n);
    let x = spd_solve(&s, &b).unwrap();
    assert!(residual(&s, &x, &b) <= 1e-11);
}

#[test]
fn indefinite_matrix_is_not_spd() {
    let a = SparseMatrixC::from_dense(
        &[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(2.0, 0.0), c(1.0, 0.0)]],
        Symmetry::RealSymmetric,
    )
    .unwrap();
    assert!(matches!(SpdFactorization::new(&a), Err(Error::NotSpd { .. })));
}

#[test]
fn arnoldi_diagonal_pencil() {
    let n = 40;
    let t: Vec<_> = (0..n).map(|i| (i, i, c(i as f64 + 1.0, 0.0))).collect();
    let a = SparseMatrixC::from_triplets(n, &t, Symmetry::RealSymmetric).unwrap();
    let set = arnoldi_smallest(&a, &SparseMatrixC::identity(n), 2, &ArnoldiOptions::default()).unwrap();
    let l = set.lambdas();
    assert!(
        (l[0] - c(-1.0, 0.0)).norm() < 1e-10 && (l[1] - c(-2.0, 0.0)).norm() < 1e-10,
        "{l:?}"
    );
}

#[test]
fn arnoldi_small_dimension() {
    let t: Vec<_> = (0..6).map(|i| (i, i, c(i as f64 + 1.0, 0.0))).collect();
    let a = SparseMatrixC::from_triplets(6, &t, Symmetry::RealSymmetric).unwrap();
    let set = arnoldi_smallest(&a, &SparseMatrixC::identity(6), 3, &ArnoldiOptions::default()).unwrap();
    assert_eq!(set.lambdas().len(), 3);
    assert!((set.lambdas()[2] - c(-3.0, 0.0)).norm() < 1e-10);
}

#[test]
fn arnoldi_rank_deficient_boundary() {
    let n = 20;
    let t: Vec<_> = (0..n).map(|i| (i, i, c(i as f64 + 1.0, 0.0))).collect();
    let a = SparseMatrixC::from_triplets(n, &t, Symmetry::RealSymmetric).unwrap();
    let b =
        SparseMatrixC::from_triplets(n, &[(0, 0, c(1.0, 0.0)), (5, 5, c(1.0, 0.0))], Symmetry::RealSymmetric).unwrap();
    let set = arnoldi_smallest(&a, &b, 2, &ArnoldiOptions::default()).unwrap();
    let l = set.lambdas();
    assert!(
        (l[0] - c(-1.0, 0.0)).norm() < 1e-10 && (l[1] - c(-6.0, 0.0)).norm() < 1e-10,
        "{l:?}"
    );
    let err = arnoldi_smallest(&a, &b, 3, &ArnoldiOptions::default()).unwrap_err();
    assert!(
        matches!(
            err,
            Error::InsufficientSpectrum {
                requested: 3,
                available: 2
            }
        ),
        "{err:?}"
    );
    let zero = SparseMatrixC::from_triplets(n, &[], Symmetry::RealSymmetric).unwrap();
    assert!(arnoldi_smallest(&a, &zero, 1, &ArnoldiOptions::default()).is_err());
}

#[test]
fn arnoldi_matches_dense_oracle_on_square() {
    for n_index in [c(4.0, 0.0), c(4.0, 4.0)] {
        let m = mesh(DomainKind::Square, 8);
        let (a, b) = pencil(&m, n_index);
        let set = arnoldi_smallest(&a, &b, 4, &ArnoldiOptions::default()).unwrap();
        let oracle = dense_oracle_eig(&a.to_dense(), &b.to_dense())
            .unwrap()
            .smallest_lambdas(4);
        for (x, y) in set.lambdas().iter().zip(&oracle) {
            assert!(rel_err(*x, *y) <= 1e-8, "{x} vs {y}");
        }
        for p in set.pairs() {
            assert!(p.residual <= 1e-10);
            let energy = dotc(&p.vector, &b.matvec(&p.vector));
            assert!((energy - c(1.0, 0.0)).norm() < 1e-12);
        }
    }
}

#[test]
fn arnoldi_is_deterministic() {
    let m = mesh(DomainKind::LShape, 8);
    let (a, b) = pencil(&m, c(4.0, 4.0));
    let first = arnoldi_smallest(&a, &b, 4, &ArnoldiOptions::default()).unwrap();
    let second = arnoldi_smallest(&a, &b, 4, &ArnoldiOptions::default()).unwrap();
    assert_eq!(first.lambdas(), second.lambdas());
}

#[test]
fn dense_oracle_trivial_pencils() {
    let i3 = SparseMatrixC::identity(3).to_dense();
    let s = dense_oracle_eig(&i3, &i3).unwrap();
    assert!(s.finite().iter().all(|m| (m - c(1.0, 0.0)).norm() < 1e-14));
    let a = vec![vec![c(2.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(4.0, 0.0)]];
    let b = vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]];
    let mu = dense_oracle_eig(&a, &b).unwrap().finite();
    assert!((mu[0] - c(2.0, 0.0)).norm() < 1e-14 && (mu[1] - c(4.0, 0.0)).norm() < 1e-14);
    let zero = vec![vec![c(0.0, 0.0); 2]; 2];
    assert!(dense_oracle_eig(&zero, &b).is_err());
}

#[test]
fn pencil_rank_equals_boundary_nodes() {
    let m = mesh(DomainKind::Square, 4);
    let (a, b) = pencil(&m, c(4.0, 0.0));
    let finite = dense_oracle_eig(&a.to_dense(), &b.to_dense()).unwrap().finite();
    assert_eq!(finite.len(), m.nodes_on(&EdgeTag::PHYSICAL).len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn symmetric_solve_residual(seed in 0u64..10_000, n in 5usize..80, density in 0.01f64..0.2) {
        let mut r = rng(seed);
        let a = random_complex_symmetric(&mut r, n, density, 4.0);
        let f = LuFactorization::new(&a).unwrap();
        let b = random_vector(&mut r, n);
        for mode in [SolveMode::Normal, SolveMode::ConjugateTranspose] {
            let x = f.solve(&b, mode).unwrap();
            let ax = match mode {
                SolveMode::Normal => a.matvec(&x),
                SolveMode::ConjugateTranspose => a.matvec_adjoint(&x),
            };
            let res: Vec<C64> = ax.iter().zip(&b).map(|(p, q)| p - q).collect();
            prop_assert!(norm2(&res) / norm2(&b) <= 1e-10);
        }
    }
}
