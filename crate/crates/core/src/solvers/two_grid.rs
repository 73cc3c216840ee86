use std::sync::Arc;
use std::time::Instant;

use super::{rayleigh_quotient, CoarseStep, DualShift, SchemeKind, SchemeResult, SolverOptions, StepTimes};
use crate::assembly::{
    assemble_boundary_mass, assemble_mass, assemble_operator, assemble_shifted_laplacian, CoefficientField,
};
use crate::error::Result;
use crate::linalg::{LuFactorization, SolveMode, SpdFactorization};
use crate::mesh::{prolongate, EdgeTag, FeFunction, TriMesh};
use crate::C64;

/// Two-grid scheme with the operator itself on the fine grid.
pub fn scheme1(
    coarse: &Arc<TriMesh>,
    fine: &Arc<TriMesh>,
    coeff: &CoefficientField,
    index: usize,
    opts: &SolverOptions,
) -> Result<SchemeResult> {
    Ok(scheme1_multi(coarse, fine, coeff, &[index], opts)?.remove(0))
}

/// [`scheme1`] for several indices sharing the coarse solve and the fine
/// factorization. Shared step times are reported on every result.
pub fn scheme1_multi(
    coarse: &Arc<TriMesh>,
    fine: &Arc<TriMesh>,
    coeff: &CoefficientField,
    indices: &[usize],
    opts: &SolverOptions,
) -> Result<Vec<SchemeResult>> {
    let step1 = CoarseStep::run(coarse, coeff, indices, opts)?;
    let start = Instant::now();
    let a = assemble_operator(fine, coeff)?;
    let b = assemble_boundary_mass(fine, &EdgeTag::PHYSICAL)?;
    let lu = LuFactorization::new(&a)?;
    let setup = start.elapsed().as_secs_f64();

    let mut out = Vec::with_capacity(indices.len());
    for &j in indices {
        let (lambda_h, u_h, dual_h, t_pair) = step1.pair(j, opts)?;
        let start = Instant::now();
        let pu = prolongate(&u_h, fine)?;
        let pdual = prolongate(&dual_h, fine)?;
        let mut rhs = b.matvec(pu.values());
        rhs.iter_mut().for_each(|v| *v *= -lambda_h);
        lu.solve_in_place(&mut rhs, SolveMode::Normal)?;
        let mut rhs_dual = b.matvec(pdual.values());
        rhs_dual.iter_mut().for_each(|v| *v *= -lambda_h.conj());
        lu.solve_in_place(&mut rhs_dual, SolveMode::ConjugateTranspose)?;
        let t2 = start.elapsed().as_secs_f64();

        let start = Instant::now();
        let lambda_w = rayleigh_quotient(&a, &b, &rhs, &rhs_dual)?;
        let t3 = start.elapsed().as_secs_f64();
        out.push(SchemeResult {
            kind: SchemeKind::TwoGrid1,
            index: j,
            lambda_coarse: lambda_h,
            lambda_fine: Some(lambda_w),
            lambda_local: None,
            lambda_local_dual: None,
            dof_coarse: coarse.node_count(),
            dof_fine: Some(fine.node_count()),
            dof_local: None,
            coarse: u_h,
            coarse_dual: dual_h,
            fine: Some(FeFunction::new(Arc::clone(fine), rhs)?),
            fine_dual: Some(FeFunction::new(Arc::clone(fine), rhs_dual)?),
            local: None,
            times: StepTimes {
                step1: step1.seconds + t_pair,
                step2: setup + t2,
                step3: t3,
            },
        });
    }
    Ok(out)
}

/// Two-grid scheme whose fine solves use the real SPD operator `K + M`.
pub fn scheme2(
    coarse: &Arc<TriMesh>,
    fine: &Arc<TriMesh>,
    coeff: &CoefficientField,
    index: usize,
    opts: &SolverOptions,
) -> Result<SchemeResult> {
    Ok(scheme2_multi(coarse, fine, coeff, &[index], opts)?.remove(0))
}

pub fn scheme2_multi(
    coarse: &Arc<TriMesh>,
    fine: &Arc<TriMesh>,
    coeff: &CoefficientField,
    indices: &[usize],
    opts: &SolverOptions,
) -> Result<Vec<SchemeResult>> {
    let step1 = CoarseStep::run(coarse, coeff, indices, opts)?;
    let start = Instant::now();
    let spd = SpdFactorization::new(&assemble_shifted_laplacian(fine)?)?;
    let b = assemble_boundary_mass(fine, &EdgeTag::PHYSICAL)?;
    let weight = coeff.shifted_mass_weight();
    let m_primal = assemble_mass(fine, &weight)?;
    // the dual identity carries the conjugate weight k² n̄ + 1
    let m_dual = assemble_mass(fine, &weight.conjugate())?;
    let dual_shift = |l: C64| match opts.scheme2_dual_shift {
        DualShift::Primal => -l,
        DualShift::Conjugate => -l.conj(),
    };
    let a = assemble_operator(fine, coeff)?;
    let setup = start.elapsed().as_secs_f64();

    let mut out = Vec::with_capacity(indices.len());
    for &j in indices {
        let (lambda_h, u_h, dual_h, t_pair) = step1.pair(j, opts)?;
        let start = Instant::now();
        let pu = prolongate(&u_h, fine)?;
        let pdual = prolongate(&dual_h, fine)?;
        let rhs = combine(-lambda_h, &b.matvec(pu.values()), &m_primal.matvec(pu.values()));
        let rhs_dual = combine(
            dual_shift(lambda_h),
            &b.matvec(pdual.values()),
            &m_dual.matvec(pdual.values()),
        );
        let u_w = spd.solve(&rhs)?;
        let dual_w = spd.solve(&rhs_dual)?;
        let t2 = start.elapsed().as_secs_f64();

        let start = Instant::now();
        let lambda_w = rayleigh_quotient(&a, &b, &u_w, &dual_w)?;
        let t3 = start.elapsed().as_secs_f64();
        out.push(SchemeResult {
            kind: SchemeKind::TwoGrid2,
            index: j,
            lambda_coarse: lambda_h,
            lambda_fine: Some(lambda_w),
            lambda_local: None,
            lambda_local_dual: None,
            dof_coarse: coarse.node_count(),
            dof_fine: Some(fine.node_count()),
            dof_local: None,
            coarse: u_h,
            coarse_dual: dual_h,
            fine: Some(FeFunction::new(Arc::clone(fine), u_w)?),
            fine_dual: Some(FeFunction::new(Arc::clone(fine), dual_w)?),
            local: None,
            times: StepTimes {
                step1: step1.seconds + t_pair,
                step2: setup + t2,
                step3: t3,
            },
        });
    }
    Ok(out)
}

// alpha·x + y
fn combine(alpha: C64, x: &[C64], y: &[C64]) -> Vec<C64> {
    x.iter().zip(y).map(|(p, q)| alpha * p + q).collect()
}
