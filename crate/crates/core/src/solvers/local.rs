use std::sync::Arc;
use std::time::Instant;

use super::{rq_ratio, scheme1_multi, SchemeKind, SchemeResult, SolverOptions};
use crate::assembly::{
    assemble_boundary_mass, assemble_boundary_mass_on, assemble_operator, assemble_operator_on, CoefficientField,
};
use crate::error::{Error, Result};
use crate::linalg::{LuFactorization, SolveMode};
use crate::mesh::{extract_submesh, prolongate, refine_levels, EdgeTag, FeFunction, RegionSpec, TriMesh, GEOM_TOL};
use crate::C64;

/// Local fine-grid correction of the local scheme.
#[derive(Debug, Clone)]
pub struct LocalCorrection {
    /// Locally refined mesh of the region.
    pub mesh: Arc<TriMesh>,
    /// `e^h` and `e^{h*}`, zero on the artificial boundary.
    pub error: FeFunction,
    pub error_dual: FeFunction,
    /// `u^w + e^h` and its dual on the local mesh.
    pub corrected: FeFunction,
    pub corrected_dual: FeFunction,
}

/// Local defect correction: the two-grid scheme on (`coarse`, `meso`), then a
/// correction solved on `region` refined `levels` more times, then a Rayleigh
/// quotient of the composite function.
///
/// `meso` must descend from `coarse` by refinement. Step 3 of the result
/// covers both the local solves and the composite quotient.
pub fn scheme3(
    coarse: &Arc<TriMesh>,
    meso: &Arc<TriMesh>,
    region: &RegionSpec,
    levels: usize,
    coeff: &CoefficientField,
    index: usize,
    opts: &SolverOptions,
) -> Result<SchemeResult> {
    Ok(scheme3_multi(coarse, meso, region, levels, coeff, &[index], opts)?.remove(0))
}

pub fn scheme3_multi(
    coarse: &Arc<TriMesh>,
    meso: &Arc<TriMesh>,
    region: &RegionSpec,
    levels: usize,
    coeff: &CoefficientField,
    indices: &[usize],
    opts: &SolverOptions,
) -> Result<Vec<SchemeResult>> {
    if levels == 0 {
        return Err(Error::invalid("local refinement needs at least one level"));
    }
    let two_grid = scheme1_multi(coarse, meso, coeff, indices, opts)?;

    let start = Instant::now();
    let sub = Arc::new(extract_submesh(meso, region)?);
    let local = refine_levels(&sub, levels)?.pop().expect("at least one level");
    let a = assemble_operator(&local, coeff)?;
    let b = assemble_boundary_mass(&local, &EdgeTag::PHYSICAL)?;
    let (a_free, free) = a.principal_submatrix(local.free_dof_mask())?;
    let lu = LuFactorization::new(&a_free)?;

    // parts of the quotient carried by the mesoscopic elements outside the region
    let tol = GEOM_TOL * meso.spacing();
    let outside = |e: usize| !region.contains(meso.element_centroid(e), tol);
    let a_out = assemble_operator_on(meso, coeff, &outside)?;
    let b_out = assemble_boundary_mass_on(meso, &EdgeTag::PHYSICAL, &outside)?;
    let setup = start.elapsed().as_secs_f64();

    let mut out = Vec::with_capacity(two_grid.len());
    for mut res in two_grid {
        let start = Instant::now();
        let u_w = res.fine.as_ref().expect("two-grid result has a fine function");
        let dual_w = res.fine_dual.as_ref().expect("two-grid result has a fine dual");
        let lambda_h = res.lambda_coarse;
        let pu_h = prolongate(&res.coarse, &local)?;
        let pdual_h = prolongate(&res.coarse_dual, &local)?;
        let pu_w = prolongate(u_w, &local)?;
        let pdual_w = prolongate(dual_w, &local)?;

        let mut r = residual(-lambda_h, &b.matvec(pu_h.values()), &a.matvec(pu_w.values()), &free);
        lu.solve_in_place(&mut r, SolveMode::Normal)?;
        let mut r_dual = residual(
            -lambda_h.conj(),
            &b.matvec(pdual_h.values()),
            &a.matvec_adjoint(pdual_w.values()),
            &free,
        );
        lu.solve_in_place(&mut r_dual, SolveMode::ConjugateTranspose)?;
        let e = scatter(&r, &free, local.node_count());
        let e_dual = scatter(&r_dual, &free, local.node_count());

        let corrected: Vec<C64> = pu_w.values().iter().zip(&e).map(|(u, e)| u + e).collect();
        let corrected_dual: Vec<C64> = pdual_w.values().iter().zip(&e_dual).map(|(u, e)| u + e).collect();
        let num = a_out.form(u_w.values(), dual_w.values()) + a.form(&corrected, &corrected_dual);
        let den = b_out.form(u_w.values(), dual_w.values()) + b.form(&corrected, &corrected_dual);
        let lambda = rq_ratio(num, den)?;

        res.kind = SchemeKind::Local3;
        res.lambda_local = Some(lambda);
        res.lambda_local_dual = Some(lambda.conj());
        res.dof_local = Some(local.free_dof_count());
        res.times.step2 += res.times.step3;
        res.times.step3 = setup + start.elapsed().as_secs_f64();
        res.local = Some(LocalCorrection {
            mesh: Arc::clone(&local),
            error: FeFunction::new(Arc::clone(&local), e)?,
            error_dual: FeFunction::new(Arc::clone(&local), e_dual)?,
            corrected: FeFunction::new(Arc::clone(&local), corrected)?,
            corrected_dual: FeFunction::new(Arc::clone(&local), corrected_dual)?,
        });
        out.push(res);
    }
    Ok(out)
}

// alpha·b − a restricted to the free dofs
fn residual(alpha: C64, b: &[C64], a: &[C64], free: &[usize]) -> Vec<C64> {
    free.iter().map(|&i| alpha * b[i] - a[i]).collect()
}

fn scatter(x: &[C64], free: &[usize], n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n];
    for (&i, &v) in free.iter().zip(x) {
        out[i] = v;
    }
    out
}
