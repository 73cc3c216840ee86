use std::sync::Arc;

use super::{NodeOrigin, TriMesh};
use crate::error::{Error, Result};
use crate::C64;

/// Continuous piecewise-linear function given by its nodal values.
#[derive(Debug, Clone)]
pub struct FeFunction {
    mesh: Arc<TriMesh>,
    values: Vec<C64>,
}

impl FeFunction {
    pub fn new(mesh: Arc<TriMesh>, values: Vec<C64>) -> Result<Self> {
        if values.len() != mesh.node_count() {
            return Err(Error::invalid(format!(
                "{} coefficients for a mesh with {} nodes",
                values.len(),
                mesh.node_count()
            )));
        }
        Ok(Self { mesh, values })
    }

    pub fn constant(mesh: Arc<TriMesh>, value: C64) -> Self {
        let values = vec![value; mesh.node_count()];
        Self { mesh, values }
    }

    pub fn from_fn(mesh: Arc<TriMesh>, f: impl Fn([f64; 2]) -> C64) -> Self {
        let values = mesh.nodes().iter().map(|&p| f(p)).collect();
        Self { mesh, values }
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    /// True when every constrained (Gamma) node carries an exact zero.
    pub fn vanishes_on_gamma(&self) -> bool {
        self.mesh
            .free_dof_mask()
            .iter()
            .zip(&self.values)
            .all(|(&free, v)| free || *v == C64::new(0.0, 0.0))
    }
}

/// Interpolates `f` onto `fine`, which must descend from `f`'s mesh through
/// refinement and/or submesh extraction.
///
/// Each level copies parent values and averages edge endpoints, so the result
/// is the same piecewise-linear function.
pub fn prolongate(f: &FeFunction, fine: &Arc<TriMesh>) -> Result<FeFunction> {
    let target = f.mesh.id();
    let mut chain: Vec<&TriMesh> = Vec::new();
    let mut cursor: &TriMesh = fine.as_ref();
    while cursor.id() != target {
        chain.push(cursor);
        cursor = match cursor.provenance() {
            Some(p) => p.parent.as_ref(),
            None => return Err(Error::invalid("fine mesh does not descend from the function's mesh")),
        };
    }
    let mut values = f.values.clone();
    for mesh in chain.iter().rev() {
        let origin = &mesh.provenance().expect("chain links have provenance").origin;
        values = origin
            .iter()
            .map(|o| match *o {
                NodeOrigin::Node(p) => values[p],
                NodeOrigin::Midpoint(a, b) => (values[a] + values[b]) * 0.5,
            })
            .collect();
    }
    Ok(FeFunction {
        mesh: Arc::clone(fine),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_structured_mesh, extract_submesh, refine_red, DomainSpec};

    #[test]
    fn midpoint_is_average_and_constants_survive() {
        let coarse = Arc::new(build_structured_mesh(DomainSpec::square(), 4).unwrap());
        let fine = Arc::new(refine_red(&coarse).unwrap());
        let mut vals = vec![C64::new(0.0, 0.0); coarse.node_count()];
        vals[1] = C64::new(1.0, 0.0);
        let f = FeFunction::new(Arc::clone(&coarse), vals).unwrap();
        let g = prolongate(&f, &fine).unwrap();
        let prov = fine.provenance().unwrap();
        let m = prov
            .origin
            .iter()
            .position(|o| *o == NodeOrigin::Midpoint(0, 1) || *o == NodeOrigin::Midpoint(1, 0))
            .unwrap();
        assert_eq!(g.values()[m], C64::new(0.5, 0.0));

        let one = FeFunction::constant(Arc::clone(&coarse), C64::new(1.0, 0.0));
        let g = prolongate(&one, &fine).unwrap();
        assert!(g.values().iter().all(|v| *v == C64::new(1.0, 0.0)));
    }

    #[test]
    fn chain_through_submesh() {
        let d = DomainSpec::lshape();
        let coarse = Arc::new(build_structured_mesh(d, 8).unwrap());
        let meso = Arc::new(refine_red(&coarse).unwrap());
        let sub = Arc::new(extract_submesh(&meso, &d.default_local_region().unwrap()).unwrap());
        let fine = Arc::new(refine_red(&sub).unwrap());
        let lin = |p: [f64; 2]| C64::new(2.0 * p[0] - p[1], p[0] + 0.5);
        let f = FeFunction::from_fn(Arc::clone(&coarse), lin);
        let g = prolongate(&f, &fine).unwrap();
        for (p, v) in fine.nodes().iter().zip(g.values()) {
            assert!((lin(*p) - v).norm() < 1e-14);
        }
    }

    #[test]
    fn unrelated_meshes_are_rejected() {
        let a = Arc::new(build_structured_mesh(DomainSpec::square(), 4).unwrap());
        let b = Arc::new(build_structured_mesh(DomainSpec::square(), 8).unwrap());
        let f = FeFunction::constant(a, C64::new(1.0, 0.0));
        assert!(matches!(prolongate(&f, &b), Err(Error::InvalidArgument(_))));
    }
}
