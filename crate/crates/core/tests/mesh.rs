mod common;

use std::sync::Arc;

use common::*;
use proptest::prelude::*;
use steklab::mesh::*;
use steklab::C64;

fn closed_form_nodes(kind: DomainKind, n: usize) -> usize {
    match kind {
        DomainKind::Square => (n + 1) * (n + 1),
        DomainKind::LShape => (n + 1) * (n + 1) - (n / 2) * (n / 2),
        DomainKind::Slit => (n + 1) * (n + 1) + n / 2,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn structured_meshes_are_valid(k in 0usize..3, quarter in 1usize..10) {
        let kind = DomainKind::ALL[k];
        let n = 4 * quarter;
        let m = mesh(kind, n);
        m.validate().unwrap();
        let s = m.stats();
        let d = DomainSpec::new(kind);
        prop_assert_eq!(s.node_count, closed_form_nodes(kind, n));
        prop_assert!((s.area - d.area()).abs() < 1e-12);
        prop_assert!((s.boundary_length - d.perimeter()).abs() < 1e-12);
        prop_assert_eq!(s.constrained_dof_count, 0);
    }

    #[test]
    fn refinement_preserves_geometry(k in 0usize..3, quarter in 1usize..5) {
        let kind = DomainKind::ALL[k];
        let m = mesh(kind, 4 * quarter);
        let fine = refine_red(&m).unwrap();
        fine.validate().unwrap();
        prop_assert_eq!(fine.node_count(), closed_form_nodes(kind, 8 * quarter));
        prop_assert_eq!(fine.element_count(), 4 * m.element_count());
        prop_assert!((fine.stats().area - m.stats().area).abs() < 1e-12);
        prop_assert!((fine.spacing() - m.spacing() / 2.0).abs() < 1e-15);
    }

    // interpolation of a linear function through refinement and extraction is exact
    #[test]
    fn prolongation_reproduces_linear_functions(
        k in 1usize..3, a in -2.0f64..2.0, b in -2.0f64..2.0, c0 in -2.0f64..2.0, levels in 1usize..3
    ) {
        let kind = DomainKind::ALL[k];
        let lin = |p: [f64; 2]| C64::new(a + b * p[0], c0 * p[1] - a * p[0]);
        let coarse = mesh(kind, 8);
        let meso = Arc::new(refine_red(&coarse).unwrap());
        let region = DomainSpec::new(kind).default_local_region().unwrap();
        let sub = Arc::new(extract_submesh(&meso, &region).unwrap());
        let local = refine_levels(&sub, levels).unwrap().pop().unwrap();
        let f = FeFunction::from_fn(Arc::clone(&coarse), lin);
        let g = prolongate(&f, &local).unwrap();
        for (v, p) in g.values().iter().zip(local.nodes()) {
            prop_assert!((v - lin(*p)).norm() < 1e-12);
        }
    }
}

#[test]
fn local_scheme_dof_counts() {
    for (kind, expected) in [
        (DomainKind::LShape, [3201, 49665, 48896, 196096, 785408]),
        (DomainKind::Slit, [4257, 66177, 65152, 261376, 1047040]),
    ] {
        let coarse = mesh(kind, 64);
        let meso = refine_levels(&coarse, 2).unwrap().pop().unwrap();
        let region = DomainSpec::new(kind).default_local_region().unwrap();
        let sub = Arc::new(extract_submesh(&meso, &region).unwrap());
        let locals = refine_levels(&sub, 3).unwrap();
        let got: Vec<usize> = [coarse.node_count(), meso.node_count()]
            .into_iter()
            .chain(locals.iter().map(|m| m.free_dof_count()))
            .collect();
        assert_eq!(got, expected, "{kind}");
        for m in &locals {
            assert_eq!(m.free_dof_count(), m.node_count() - m.stats().constrained_dof_count);
        }
    }
}

#[test]
fn gamma_nodes_are_the_only_constrained_nodes() {
    let meso = mesh(DomainKind::LShape, 32);
    let region = DomainSpec::lshape().default_local_region().unwrap();
    let sub = Arc::new(extract_submesh(&meso, &region).unwrap());
    let bump = sub
        .free_dof_mask()
        .iter()
        .map(|&free| C64::new(if free { 1.0 } else { 0.0 }, 0.0))
        .collect();
    let f = FeFunction::new(Arc::clone(&sub), bump).unwrap();
    assert!(f.vanishes_on_gamma());
    let g = FeFunction::constant(Arc::clone(&sub), C64::new(1.0, 0.0));
    assert!(!g.vanishes_on_gamma());
    // Gamma is the part of the region boundary inside the domain: three
    // half-sides of length 1/2 and the two pieces along the axes
    let gamma_len: f64 = sub
        .boundary_edges()
        .iter()
        .filter(|e| e.tag == EdgeTag::Gamma)
        .map(|e| sub.edge_length(e))
        .sum();
    assert!((gamma_len - 3.0).abs() < 1e-12, "{gamma_len}");
}

#[test]
fn mesh_file_round_trip() {
    let m = mesh(DomainKind::Slit, 8);
    let mut buf = Vec::new();
    write_mesh(&m, &mut buf).unwrap();
    let back = read_mesh(buf.as_slice()).unwrap();
    assert_eq!(back.nodes(), m.nodes());
    assert_eq!(back.elements(), m.elements());
    assert_eq!(back.boundary_edges().len(), m.boundary_edges().len());
}
