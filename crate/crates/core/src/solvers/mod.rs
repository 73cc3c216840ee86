//! Direct eigensolve, primal/dual pairing, the generalized Rayleigh quotient
//! and the two-grid and local correction schemes built on them.

mod local;
mod two_grid;

use std::sync::Arc;
use std::time::Instant;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_boundary_mass, assemble_operator, CoefficientField};
use crate::error::{Error, Result};
use crate::linalg::{arnoldi_smallest, dotc, report_order, ArnoldiOptions, EigenPair, SparseMatrixC};
use crate::mesh::{DomainKind, EdgeTag, FeFunction, TriMesh};
use crate::C64;

pub use local::{scheme3, scheme3_multi, LocalCorrection};
pub use two_grid::{scheme1, scheme1_multi, scheme2, scheme2_multi};

/// Which method produced a [`SchemeResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Direct,
    #[serde(rename = "scheme1")]
    TwoGrid1,
    #[serde(rename = "scheme2")]
    TwoGrid2,
    #[serde(rename = "scheme3")]
    Local3,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Direct => "direct",
            SchemeKind::TwoGrid1 => "scheme1",
            SchemeKind::TwoGrid2 => "scheme2",
            SchemeKind::Local3 => "scheme3",
        }
    }
}

impl std::fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "direct" => Ok(SchemeKind::Direct),
            "scheme1" | "twogrid1" => Ok(SchemeKind::TwoGrid1),
            "scheme2" | "twogrid2" => Ok(SchemeKind::TwoGrid2),
            "scheme3" | "local3" => Ok(SchemeKind::Local3),
            other => Err(Error::invalid(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Tunables shared by every scheme.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub arnoldi: ArnoldiOptions,
    /// Lower bound on `|⟨u_H, u*_H⟩|`.
    pub pairing_threshold: f64,
    /// Relative distance within which coarse eigenvalues form one cluster.
    pub cluster_tol: f64,
    /// Shift applied to the boundary term of the shifted-Laplacian dual solve.
    pub scheme2_dual_shift: DualShift,
}

/// Boundary shift in the dual source problem of the shifted-Laplacian scheme,
/// written in conjugated form `(K + M) û* = s·B û*_H + M_{k²n̄+1} û*_H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DualShift {
    /// `s = −λ_H`; reproduces the published complex two-grid results.
    #[default]
    Primal,
    /// `s = −λ̄_H`, the exact adjoint of the primal source problem.
    Conjugate,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            arnoldi: ArnoldiOptions::default(),
            pairing_threshold: 0.1,
            cluster_tol: 1e-3,
            scheme2_dual_shift: DualShift::Primal,
        }
    }
}

/// Eigenpairs of the pencil on one mesh.
#[derive(Debug, Clone)]
pub struct DirectSolution {
    pub mesh: Arc<TriMesh>,
    pub operator: SparseMatrixC,
    pub boundary_mass: SparseMatrixC,
    /// Reported pairs in reporting order.
    pub pairs: Vec<EigenPair>,
    /// Every converged candidate pair, including those not reported.
    pub candidates: Vec<EigenPair>,
    pub seconds: f64,
}

impl DirectSolution {
    pub fn lambdas(&self) -> Vec<C64> {
        self.pairs.iter().map(|p| p.lambda).collect()
    }

    /// Eigenpair by 1-based index into the reported list.
    pub fn pair(&self, index: usize) -> Result<&EigenPair> {
        index
            .checked_sub(1)
            .and_then(|i| self.pairs.get(i))
            .ok_or_else(|| Error::invalid(format!("eigenvalue index {index} outside 1..={}", self.pairs.len())))
    }

    pub fn function(&self, index: usize) -> Result<FeFunction> {
        FeFunction::new(Arc::clone(&self.mesh), self.pair(index)?.vector.clone())
    }
}

/// Eigenpairs of `A û = −λ B û` on `mesh`.
///
/// Twice `count` smallest-magnitude candidates are computed and the first
/// `count` in reporting order are kept; this is how the reference tables
/// select their rows.
pub fn solve_direct(
    mesh: &Arc<TriMesh>,
    coeff: &CoefficientField,
    count: usize,
    opts: &SolverOptions,
) -> Result<DirectSolution> {
    if count == 0 {
        return Err(Error::invalid("eigenvalue count must be at least 1"));
    }
    let start = Instant::now();
    let a = assemble_operator(mesh, coeff)?;
    let b = assemble_boundary_mass(mesh, &EdgeTag::PHYSICAL)?;
    let wanted = (2 * count).min(mesh.nodes_on(&EdgeTag::PHYSICAL).len()).max(count);
    let set = arnoldi_smallest(&a, &b, wanted, &opts.arnoldi)?;
    let candidates = set.pairs().to_vec();
    let pairs: Vec<EigenPair> = candidates.iter().take(count).cloned().collect();
    let mut smallest: Vec<C64> = set.candidates().iter().take(count).copied().collect();
    smallest.sort_by(report_order);
    let reported: Vec<C64> = pairs.iter().map(|p| p.lambda).collect();
    if smallest != reported {
        log::info!("reported eigenvalues {reported:?} are not the {count} smallest in magnitude {smallest:?}");
    }
    Ok(DirectSolution {
        mesh: Arc::clone(mesh),
        operator: a,
        boundary_mass: b,
        pairs,
        candidates,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// `⟨f, g⟩ = ĝᴴ B f̂`
pub(crate) fn boundary_inner(b: &SparseMatrixC, f: &[C64], g: &[C64]) -> C64 {
    dotc(g, &b.matvec(f))
}

/// Dual partner of the `index`-th (1-based) eigenfunction: the boundary-L²
/// projection of `u_H` onto the span of the conjugated eigenvectors of its
/// cluster, normalized in the boundary norm.
pub fn dual_partner(sol: &DirectSolution, index: usize, opts: &SolverOptions) -> Result<FeFunction> {
    let target = sol.pair(index)?;
    let u = &target.vector;
    let b = &sol.boundary_mass;
    let cluster: Vec<Vec<C64>> = sol
        .candidates
        .iter()
        .filter(|p| (p.lambda - target.lambda).norm() <= opts.cluster_tol * target.lambda.norm())
        .map(|p| p.vector.iter().map(|v| v.conj()).collect())
        .collect();
    let q = cluster.len();
    let gram = Mat::<C64>::from_fn(q, q, |p, r| boundary_inner(b, &cluster[r], &cluster[p]));
    let rhs = Mat::<C64>::from_fn(q, 1, |p, _| boundary_inner(b, u, &cluster[p]));
    let coeffs = faer::linalg::solvers::Solve::solve(&gram.partial_piv_lu(), &rhs);
    let mut proj = vec![C64::new(0.0, 0.0); u.len()];
    for (p, w) in cluster.iter().enumerate() {
        let c = coeffs[(p, 0)];
        proj.iter_mut().zip(w).for_each(|(x, y)| *x += c * y);
    }
    let nrm = boundary_inner(b, &proj, &proj).re.sqrt();
    if !(nrm > 0.0) || !nrm.is_finite() {
        return Err(Error::DegeneratePairing { value: 0.0 });
    }
    proj.iter_mut().for_each(|x| *x /= nrm);
    let pairing = boundary_inner(b, u, &proj).norm();
    if pairing < opts.pairing_threshold {
        return Err(Error::DegeneratePairing { value: pairing });
    }
    if q > 1 {
        log::debug!("dual partner of λ_{index} = {} uses a cluster of {q}", target.lambda);
    }
    FeFunction::new(Arc::clone(&sol.mesh), proj)
}

/// Generalized Rayleigh quotient `−a(u, u*) / ⟨u, u*⟩ = −(û*ᴴ A û)/(û*ᴴ B û)`.
pub fn rayleigh_quotient(a: &SparseMatrixC, b: &SparseMatrixC, u: &[C64], dual: &[C64]) -> Result<C64> {
    let num = a.form(u, dual);
    let den = b.form(u, dual);
    rq_ratio(num, den)
}

pub(crate) fn rq_ratio(num: C64, den: C64) -> Result<C64> {
    if den.norm() < 1e-12 {
        return Err(Error::DegeneratePairing { value: den.norm() });
    }
    let q = -num / den;
    // adding zero clears the sign of a vanishing component
    Ok(C64::new(q.re + 0.0, q.im + 0.0))
}

/// Wall-clock seconds per step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StepTimes {
    pub step1: f64,
    pub step2: f64,
    pub step3: f64,
}

impl StepTimes {
    pub fn total(&self) -> f64 {
        self.step1 + self.step2 + self.step3
    }
}

/// Output of one scheme run for one eigenvalue index.
#[derive(Debug, Clone)]
pub struct SchemeResult {
    pub kind: SchemeKind,
    /// 1-based eigenvalue index.
    pub index: usize,
    /// `λ_H` from the coarse eigensolve.
    pub lambda_coarse: C64,
    /// `λ^w` for the two-grid and local schemes.
    pub lambda_fine: Option<C64>,
    /// `λ^{w,h}` and its dual `λ^{w,h*}` for the local scheme.
    pub lambda_local: Option<C64>,
    pub lambda_local_dual: Option<C64>,
    pub coarse: FeFunction,
    pub coarse_dual: FeFunction,
    pub fine: Option<FeFunction>,
    pub fine_dual: Option<FeFunction>,
    pub local: Option<LocalCorrection>,
    pub dof_coarse: usize,
    pub dof_fine: Option<usize>,
    pub dof_local: Option<usize>,
    pub times: StepTimes,
}

impl SchemeResult {
    /// The scheme's final eigenvalue.
    pub fn lambda(&self) -> C64 {
        self.lambda_local.or(self.lambda_fine).unwrap_or(self.lambda_coarse)
    }
}

/// Coarse step shared by every scheme: eigenpairs, the `index`-th primal
/// function and its dual partner.
pub(crate) struct CoarseStep {
    pub solution: DirectSolution,
    pub seconds: f64,
}

impl CoarseStep {
    pub fn run(mesh: &Arc<TriMesh>, coeff: &CoefficientField, indices: &[usize], opts: &SolverOptions) -> Result<Self> {
        let top = indices
            .iter()
            .copied()
            .max()
            .ok_or_else(|| Error::invalid("no eigenvalue index given"))?;
        if indices.contains(&0) {
            return Err(Error::invalid("eigenvalue indices are 1-based"));
        }
        let start = Instant::now();
        let solution = solve_direct(mesh, coeff, top.max(4), opts)?;
        Ok(Self {
            solution,
            seconds: start.elapsed().as_secs_f64(),
        })
    }

    pub fn pair(&self, index: usize, opts: &SolverOptions) -> Result<(C64, FeFunction, FeFunction, f64)> {
        let start = Instant::now();
        let lambda = self.solution.pair(index)?.lambda;
        let u = self.solution.function(index)?;
        let dual = dual_partner(&self.solution, index, opts)?;
        Ok((lambda, u, dual, start.elapsed().as_secs_f64()))
    }
}

/// Expected asymptotic eigenvalue convergence orders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateModel {
    /// Regularity exponent of the domain.
    pub regularity: f64,
    /// Polynomial degree of the elements.
    pub degree: f64,
    /// Ascent of the eigenvalue.
    pub ascent: f64,
}

impl RateModel {
    pub fn for_domain(kind: DomainKind) -> Self {
        let regularity = match kind {
            DomainKind::Square => 1.0,
            DomainKind::LShape => 2.0 / 3.0,
            DomainKind::Slit => 0.5,
        };
        Self {
            regularity,
            degree: 1.0,
            ascent: 1.0,
        }
    }

    /// `2σ/α` with `σ = min(m, r)`.
    pub fn eigenvalue_order(&self) -> f64 {
        2.0 * self.degree.min(self.regularity) / self.ascent
    }
}
