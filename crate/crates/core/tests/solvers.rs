mod common;

use std::sync::Arc;

use common::*;
use proptest::prelude::*;
use steklab::assembly::CoefficientField;
use steklab::linalg::{dotc, norm2, ArnoldiOptions, SparseMatrixC};
use steklab::mesh::{refine_levels, DomainKind, DomainSpec, RegionRole, RegionSpec, TriMesh};
use steklab::solvers::*;
use steklab::{Error, C64};

fn coeff(n_im: f64) -> CoefficientField {
    CoefficientField::constant(1.0, c(4.0, n_im)).unwrap()
}

fn nested(kind: DomainKind, n: usize, steps: usize) -> (Arc<TriMesh>, Arc<TriMesh>) {
    let coarse = mesh(kind, n);
    let fine = refine_levels(&coarse, steps).unwrap().pop().unwrap();
    (coarse, fine)
}

fn boundary_norm(b: &SparseMatrixC, u: &[C64]) -> f64 {
    b.form(u, u).re.sqrt()
}

fn conj(u: &[C64]) -> Vec<C64> {
    u.iter().map(|v| v.conj()).collect()
}

#[test]
fn real_dual_partner_is_normalized_primal() {
    let sol = solve_direct(&mesh(DomainKind::LShape, 16), &coeff(0.0), 4, &SolverOptions::default()).unwrap();
    let b = &sol.boundary_mass;
    let u = sol.function(1).unwrap();
    let dual = dual_partner(&sol, 1, &SolverOptions::default()).unwrap();
    let nrm = boundary_norm(b, u.values());
    let scaled: Vec<C64> = u.values().iter().map(|v| v / nrm).collect();
    let diff: Vec<C64> = dual.values().iter().zip(&scaled).map(|(a, s)| a - s).collect();
    let sum: Vec<C64> = dual.values().iter().zip(&scaled).map(|(a, s)| a + s).collect();
    assert!(norm2(&diff).min(norm2(&sum)) < 1e-10 * norm2(&scaled));
    let pairing = b.form(u.values(), dual.values());
    assert!((pairing.norm() - nrm).abs() < 1e-10);
}

#[test]
fn complex_dual_partner_is_conjugate() {
    let sol = solve_direct(&mesh(DomainKind::Square, 16), &coeff(4.0), 4, &SolverOptions::default()).unwrap();
    let b = &sol.boundary_mass;
    let u = sol.function(1).unwrap();
    let dual = dual_partner(&sol, 1, &SolverOptions::default()).unwrap();
    let target = conj(u.values());
    let nrm = boundary_norm(b, &target);
    // optimal phase: θ = arg⟨u*, conj u⟩ in the Euclidean sense
    let phase = dotc(&target, dual.values());
    let rot = phase / phase.norm();
    let diff: Vec<C64> = dual
        .values()
        .iter()
        .zip(&target)
        .map(|(d, t)| d - rot * t / nrm)
        .collect();
    assert!(norm2(&diff) <= 1e-8 * norm2(dual.values()), "{:e}", norm2(&diff));
}

#[test]
fn clustered_pair_uses_both_conjugates() {
    let sol = solve_direct(&mesh(DomainKind::Square, 64), &coeff(0.0), 4, &SolverOptions::default()).unwrap();
    let l = sol.lambdas();
    assert!((l[1] - l[2]).norm() < 1e-3 * l[1].norm(), "{l:?}");
    for j in [2, 3] {
        let u = sol.function(j).unwrap();
        let dual = dual_partner(&sol, j, &SolverOptions::default()).unwrap();
        assert!(sol.boundary_mass.form(u.values(), dual.values()).norm() >= 0.1);
    }
    let strict = SolverOptions {
        pairing_threshold: 1.5,
        ..SolverOptions::default()
    };
    assert!(matches!(
        dual_partner(&sol, 2, &strict),
        Err(Error::DegeneratePairing { .. })
    ));
    assert!(dual_partner(&sol, 9, &SolverOptions::default()).is_err());
}

#[test]
fn conjugate_duality_and_real_spectra() {
    let opts = SolverOptions::default();
    for kind in DomainKind::ALL {
        for n_im in [0.0, 4.0] {
            let sol = solve_direct(&mesh(kind, 16), &coeff(n_im), 4, &opts).unwrap();
            let (a, b) = (&sol.operator, &sol.boundary_mass);
            for p in sol.pairs.iter().chain(&sol.candidates) {
                // conj(u) solves the adjoint pencil Aᴴ w = −conj(λ) B w
                let w = conj(&p.vector);
                let aw = a.matvec_adjoint(&w);
                let bw = b.matvec(&w);
                let r: Vec<C64> = aw.iter().zip(&bw).map(|(x, y)| x + p.lambda.conj() * y).collect();
                let res = norm2(&r) / norm2(&aw);
                assert!(res <= 10.0 * opts.arnoldi.eig_tol, "{kind} {n_im}: {res:e}");
                if n_im == 0.0 {
                    assert!(p.lambda.im.abs() <= 1e-8);
                }
            }
        }
    }
}

#[test]
fn rayleigh_quotient_of_exact_pair() {
    for n_im in [0.0, 4.0] {
        let sol = solve_direct(&mesh(DomainKind::Slit, 16), &coeff(n_im), 4, &SolverOptions::default()).unwrap();
        for p in &sol.pairs {
            let q = rayleigh_quotient(&sol.operator, &sol.boundary_mass, &p.vector, &conj(&p.vector)).unwrap();
            assert!(rel_err(q, p.lambda) <= 1e-12, "{q} vs {}", p.lambda);
        }
    }
    let m = mesh(DomainKind::Square, 4);
    let z = vec![c(0.0, 0.0); m.node_count()];
    let (a, b) = pencil(&m, c(4.0, 0.0));
    assert!(matches!(
        rayleigh_quotient(&a, &b, &z, &z),
        Err(Error::DegeneratePairing { .. })
    ));
}

fn eigentriple(n_im: f64) -> (SparseMatrixC, SparseMatrixC, C64, Vec<C64>, Vec<C64>) {
    let opts = SolverOptions {
        arnoldi: ArnoldiOptions {
            eig_tol: 1e-13,
            ..ArnoldiOptions::default()
        },
        ..SolverOptions::default()
    };
    let sol = solve_direct(&mesh(DomainKind::LShape, 12), &coeff(n_im), 4, &opts).unwrap();
    let p = sol.pair(1).unwrap().clone();
    let dual = conj(&p.vector);
    (sol.operator, sol.boundary_mass, p.lambda, p.vector, dual)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    // −a(v,v*)/⟨v,v*⟩ − λ = −[a(v−u, v*−u*) + λ⟨v−u, v*−u*⟩]/⟨v,v*⟩
    #[test]
    fn rayleigh_quotient_error_identity(seed in any::<u64>(), n_im in prop::sample::select(vec![0.0, 4.0])) {
        let (a, b, lambda, u, dual) = eigentriple(n_im);
        let mut r = rng(seed);
        let v: Vec<C64> = u.iter().zip(random_vector(&mut r, u.len())).map(|(x, z)| x + 0.3 * z).collect();
        let vd: Vec<C64> = dual.iter().zip(random_vector(&mut r, u.len())).map(|(x, z)| x + 0.3 * z).collect();
        let den = b.form(&v, &vd);
        let lhs = -a.form(&v, &vd) / den - lambda;
        let e: Vec<C64> = v.iter().zip(&u).map(|(x, y)| x - y).collect();
        let ed: Vec<C64> = vd.iter().zip(&dual).map(|(x, y)| x - y).collect();
        let rhs = -(a.form(&e, &ed) + lambda * b.form(&e, &ed)) / den;
        let scale = (a.form(&v, &vd) / den).norm() + lambda.norm();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * scale, "{:e}", (lhs - rhs).norm() / scale);
    }
}

#[test]
fn rayleigh_quotient_is_quadratically_accurate() {
    for n_im in [0.0, 4.0] {
        let (a, b, lambda, u, dual) = eigentriple(n_im);
        let mut r = rng(11);
        let z = random_vector(&mut r, u.len());
        let zd = random_vector(&mut r, u.len());
        let err = |eps: f64| {
            let v: Vec<C64> = u.iter().zip(&z).map(|(x, y)| x + eps * y).collect();
            let vd: Vec<C64> = dual.iter().zip(&zd).map(|(x, y)| x + eps * y).collect();
            (rayleigh_quotient(&a, &b, &v, &vd).unwrap() - lambda).norm()
        };
        let slope = (err(1e-2) / err(1e-3)).log10();
        assert!((slope - 2.0).abs() <= 0.1, "slope {slope}");
    }
}

#[test]
fn two_grid_on_identical_grids_returns_coarse_value() {
    let m = mesh(DomainKind::LShape, 16);
    for n_im in [0.0, 4.0] {
        let res = scheme1_multi(&m, &m, &coeff(n_im), &[1, 2, 3, 4], &SolverOptions::default()).unwrap();
        for r in res {
            assert!(
                rel_err(r.lambda(), r.lambda_coarse) <= 1e-10,
                "{} vs {}",
                r.lambda(),
                r.lambda_coarse
            );
        }
    }
}

#[test]
fn schemes_agree_and_beat_the_coarse_solve() {
    let (coarse, fine) = nested(DomainKind::Square, 32, 2);
    let opts = SolverOptions::default();
    let s1 = scheme1(&coarse, &fine, &coeff(0.0), 1, &opts).unwrap();
    let s2 = scheme2(&coarse, &fine, &coeff(0.0), 1, &opts).unwrap();
    assert!((s1.lambda() - s2.lambda()).norm() <= 5e-3);
    assert_eq!((s1.kind, s2.kind), (SchemeKind::TwoGrid1, SchemeKind::TwoGrid2));
    assert_eq!((s1.dof_coarse, s1.dof_fine), (33 * 33, Some(129 * 129)));

    for kind in DomainKind::ALL {
        for n_im in [0.0, 4.0] {
            let (coarse, fine) = nested(kind, 16, 2);
            let exact = solve_direct(&fine, &coeff(n_im), 4, &opts).unwrap().lambdas();
            for r in scheme1_multi(&coarse, &fine, &coeff(n_im), &[1, 2, 3, 4], &opts).unwrap() {
                let truth = exact[r.index - 1];
                assert!(
                    (r.lambda() - truth).norm() <= (r.lambda_coarse - truth).norm(),
                    "{kind} {n_im} j={}",
                    r.index
                );
                assert!(r.times.step1 >= 0.0 && r.times.step2 >= 0.0 && r.times.step3 >= 0.0);
            }
        }
    }
}

#[test]
fn scheme2_dual_shift_variants_agree_for_real_index() {
    let (coarse, fine) = nested(DomainKind::Slit, 16, 1);
    let adjoint = SolverOptions {
        scheme2_dual_shift: DualShift::Conjugate,
        ..SolverOptions::default()
    };
    let a = scheme2(&coarse, &fine, &coeff(0.0), 2, &SolverOptions::default()).unwrap();
    let b = scheme2(&coarse, &fine, &coeff(0.0), 2, &adjoint).unwrap();
    assert_eq!(a.lambda(), b.lambda());
    let a = scheme2(&coarse, &fine, &coeff(4.0), 2, &SolverOptions::default()).unwrap();
    let b = scheme2(&coarse, &fine, &coeff(4.0), 2, &adjoint).unwrap();
    assert!((a.lambda() - b.lambda()).norm() < 1e-2);
}

#[test]
fn local_correction_invariants() {
    let (coarse, meso) = nested(DomainKind::LShape, 16, 1);
    let region = DomainSpec::lshape().default_local_region().unwrap();
    let opts = SolverOptions::default();
    for n_im in [0.0, 4.0] {
        let r = scheme3(&coarse, &meso, &region, 1, &coeff(n_im), 2, &opts).unwrap();
        let local = r.local.as_ref().unwrap();
        assert!(local.error.vanishes_on_gamma() && local.error_dual.vanishes_on_gamma());
        assert_eq!(r.lambda_local_dual, r.lambda_local.map(|l| l.conj()));
        assert_eq!(r.dof_local, Some(local.mesh.free_dof_count()));
        assert_eq!(r.kind, SchemeKind::Local3);
        assert!(r.lambda().is_finite());
    }
    let bad = RegionSpec::new([0.0, 0.0], 0.3, RegionRole::Omega0);
    assert!(scheme3(&coarse, &meso, &bad, 1, &coeff(0.0), 2, &opts).is_err());
    assert!(scheme3(&coarse, &meso, &region, 0, &coeff(0.0), 2, &opts).is_err());
    // the meso grid must descend from the coarse grid
    let unrelated = mesh(DomainKind::LShape, 32);
    assert!(scheme3(&coarse, &unrelated, &region, 1, &coeff(0.0), 2, &opts).is_err());
}

#[test]
fn rate_model_orders() {
    let orders = DomainKind::ALL.map(|k| RateModel::for_domain(k).eigenvalue_order());
    assert_eq!(orders[0], 2.0);
    assert!((orders[1] - 4.0 / 3.0).abs() < 1e-15);
    assert_eq!(orders[2], 1.0);
    assert!(orders.iter().all(|&o| o > 0.0));
}

#[test]
fn argument_errors() {
    let m = mesh(DomainKind::Square, 8);
    assert!(solve_direct(&m, &coeff(0.0), 0, &SolverOptions::default()).is_err());
    assert!(scheme1(&m, &m, &coeff(0.0), 0, &SolverOptions::default()).is_err());
    for k in [
        SchemeKind::Direct,
        SchemeKind::TwoGrid1,
        SchemeKind::TwoGrid2,
        SchemeKind::Local3,
    ] {
        assert_eq!(k.name().parse::<SchemeKind>().unwrap(), k);
    }
}
