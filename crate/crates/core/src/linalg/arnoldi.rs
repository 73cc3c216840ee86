//! Implicitly restarted Arnoldi iteration on the shift-invert operator
//! `x ↦ A⁻¹ B x` of the pencil `A û = μ B û`.
//!
//! The largest Ritz values `θ` of the operator give the eigenvalues `μ = 1/θ`
//! of smallest magnitude. Restarts apply the unwanted Ritz values as exact
//! shifts through implicit QR sweeps on the small Hessenberg matrix.

use std::cmp::Ordering;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{dotc, norm2, LuFactorization, SolveMode, SparseMatrixC};
use crate::C64;

/// Controls for [`arnoldi_smallest`].
#[derive(Debug, Clone)]
pub struct ArnoldiOptions {
    /// Bound on `‖A û + λ B û‖ / ‖A û‖` for every returned pair.
    pub eig_tol: f64,
    /// Krylov subspace size; defaults to `max(2w + 10, 30)` for `w` candidates.
    pub max_subspace: Option<usize>,
    pub max_restarts: usize,
    pub seed: u64,
    /// Candidates tracked internally; defaults to twice the requested count.
    pub candidates: Option<usize>,
}

impl Default for ArnoldiOptions {
    fn default() -> Self {
        Self {
            eig_tol: 1e-10,
            max_subspace: None,
            max_restarts: 300,
            seed: 20240,
            candidates: None,
        }
    }
}

/// One eigenpair `A û = −λ B û`.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda: C64,
    pub vector: Vec<C64>,
    /// `‖A û + λ B û‖₂ / ‖A û‖₂`
    pub residual: f64,
}

/// Eigenpairs in [`report_order`].
#[derive(Debug, Clone)]
pub struct PencilEigenSet {
    pairs: Vec<EigenPair>,
    candidates: Vec<C64>,
    restarts: usize,
    operator_applications: usize,
}

impl PencilEigenSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[EigenPair] {
        &self.pairs
    }

    pub fn pair(&self, index: usize) -> &EigenPair {
        &self.pairs[index]
    }

    pub fn lambdas(&self) -> Vec<C64> {
        self.pairs.iter().map(|p| p.lambda).collect()
    }

    /// Every converged candidate `λ`, in order of increasing `|λ|`, including
    /// those not reported.
    pub fn candidates(&self) -> &[C64] {
        &self.candidates
    }

    pub fn restarts(&self) -> usize {
        self.restarts
    }

    pub fn operator_applications(&self) -> usize {
        self.operator_applications
    }
}

/// Reporting order: descending imaginary part, ties by descending real part.
/// Eigenvalues of real pencils are exactly real, so for them this is the
/// descending real order.
pub fn report_order(a: &C64, b: &C64) -> Ordering {
    b.im.total_cmp(&a.im).then(b.re.total_cmp(&a.re))
}

/// The `count` eigenvalues `μ` of `A û = μ B û` with smallest magnitude,
/// returned as `λ = −μ`.
pub fn arnoldi_smallest(
    a: &SparseMatrixC,
    b: &SparseMatrixC,
    count: usize,
    opts: &ArnoldiOptions,
) -> Result<PencilEigenSet> {
    let lu = LuFactorization::new(a)?;
    arnoldi_smallest_with(&lu, a, b, count, opts)
}

/// As [`arnoldi_smallest`] with an existing factorization of `A`.
pub fn arnoldi_smallest_with(
    lu: &LuFactorization,
    a: &SparseMatrixC,
    b: &SparseMatrixC,
    count: usize,
    opts: &ArnoldiOptions,
) -> Result<PencilEigenSet> {
    let n = a.dim();
    if b.dim() != n || lu.dim() != n {
        return Err(Error::invalid("pencil matrices have different dimensions"));
    }
    if count == 0 || count > n {
        return Err(Error::invalid(format!(
            "cannot compute {count} eigenvalues of a {n}×{n} pencil"
        )));
    }
    if b.max_abs() == 0.0 {
        return Err(Error::invalid("the boundary matrix is zero"));
    }
    let wanted = opts.candidates.unwrap_or(2 * count).max(count).min(n);
    let m = opts
        .max_subspace
        .unwrap_or((2 * wanted + 10).max(30))
        .max(wanted + 2)
        .min(n);
    let keep = (wanted + 5).min(m.saturating_sub(1)).max(wanted.min(m));
    let mut it = Iteration {
        lu,
        b,
        ops: 0,
        basis: Vec::with_capacity(m + 1),
        h: Mat::zeros(m + 1, m),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let start: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mut v0 = it.apply(&start)?;
    let nv = norm2(&v0);
    if !(nv > 0.0) {
        return Err(Error::InsufficientSpectrum {
            requested: count,
            available: 0,
        });
    }
    v0.iter_mut().for_each(|x| *x /= nv);
    it.basis.push(v0);

    let mut ritz_tol = (opts.eig_tol * 1e-3).max(1e-15);
    let mut best: Vec<f64> = Vec::new();
    let mut restarts = 0;
    loop {
        let size = it.extend(m)?;
        let exhausted = size < m || it.h[(size, size - 1)].norm() == 0.0;
        let ritz = RitzSystem::new(&it.h, size)?;
        let nonzero = ritz.nonzero_count();
        let take = wanted.min(nonzero);
        if exhausted && nonzero < count {
            return Err(Error::InsufficientSpectrum {
                requested: count,
                available: nonzero,
            });
        }
        let beta = if exhausted { 0.0 } else { it.h[(size, size - 1)].norm() };
        let estimates: Vec<f64> = (0..take).map(|i| ritz.estimate(i, beta)).collect();
        if estimates.len() >= count
            && (best.is_empty() || estimates.iter().take(count).sum::<f64>() < best.iter().take(count).sum::<f64>())
        {
            best = estimates.clone();
        }
        let converged = take >= count && estimates.iter().all(|&e| e <= ritz_tol);
        if converged {
            let set = it.finish(a, &ritz, size, take, count, restarts)?;
            if set.pairs.iter().all(|p| p.residual <= opts.eig_tol) {
                log::debug!(
                    "arnoldi: n = {n}, {} restarts, {} operator applications",
                    restarts,
                    set.operator_applications
                );
                return Ok(set);
            }
            if exhausted || ritz_tol <= 1e-15 {
                return Err(Error::Convergence {
                    restarts,
                    best_residuals: set.pairs.iter().map(|p| p.residual).collect(),
                });
            }
            ritz_tol = (ritz_tol * 1e-2).max(1e-15);
        }
        if exhausted {
            return Err(Error::Convergence {
                restarts,
                best_residuals: best,
            });
        }
        if restarts >= opts.max_restarts {
            return Err(Error::Convergence {
                restarts,
                best_residuals: best,
            });
        }
        restarts += 1;
        it.restart(&ritz, size, keep)?;
    }
}

fn shift_invert(lu: &LuFactorization, b: &SparseMatrixC, x: &[C64]) -> Result<Vec<C64>> {
    let mut y = b.matvec(x);
    lu.solve_in_place(&mut y, SolveMode::Normal)?;
    Ok(y)
}

struct Iteration<'a> {
    lu: &'a LuFactorization,
    b: &'a SparseMatrixC,
    ops: usize,
    basis: Vec<Vec<C64>>,
    h: Mat<C64>,
}

impl Iteration<'_> {
    fn apply(&mut self, x: &[C64]) -> Result<Vec<C64>> {
        self.ops += 1;
        shift_invert(self.lu, self.b, x)
    }

    /// Grows the factorization to `m` columns, stopping early on an invariant
    /// subspace. Returns the number of columns.
    fn extend(&mut self, m: usize) -> Result<usize> {
        let mut j = self.basis.len() - 1;
        while j < m {
            self.ops += 1;
            let mut w = shift_invert(self.lu, self.b, &self.basis[j])?;
            let scale = norm2(&w);
            // classical Gram-Schmidt with one full reorthogonalization
            for _ in 0..2 {
                let coeffs: Vec<C64> = self.basis.iter().map(|v| dotc(v, &w)).collect();
                for (v, c) in self.basis.iter().zip(&coeffs) {
                    for (wi, vi) in w.iter_mut().zip(v) {
                        *wi -= c * vi;
                    }
                }
                for (i, c) in coeffs.into_iter().enumerate() {
                    self.h[(i, j)] += c;
                }
            }
            let beta = norm2(&w);
            if beta <= 1e-12 * scale || scale == 0.0 {
                self.h[(j + 1, j)] = C64::new(0.0, 0.0);
                return Ok(j + 1);
            }
            self.h[(j + 1, j)] = C64::new(beta, 0.0);
            w.iter_mut().for_each(|x| *x /= beta);
            self.basis.push(w);
            j += 1;
        }
        Ok(m)
    }

    /// Applies the Ritz values past `keep` as exact shifts and truncates the
    /// factorization to `keep` columns.
    fn restart(&mut self, ritz: &RitzSystem, size: usize, keep: usize) -> Result<()> {
        let mut h = Mat::<C64>::from_fn(size, size, |i, j| self.h[(i, j)]);
        let mut q = Mat::<C64>::identity(size, size);
        for &s in &ritz.order[keep..size] {
            qr_sweep(&mut h, &mut q, ritz.values[s]);
        }
        let beta = self.h[(size, size - 1)];
        let n = self.basis[0].len();
        let zero = C64::new(0.0, 0.0);
        let mut new_basis = vec![vec![zero; n]; keep];
        let mut f = vec![zero; n];
        let fk = h[(keep, keep - 1)];
        let fm = beta * q[(size - 1, keep - 1)];
        for (l, v) in self.basis.iter().take(size).enumerate() {
            for (i, nb) in new_basis.iter_mut().enumerate() {
                let c = q[(l, i)];
                if c != zero {
                    nb.iter_mut().zip(v).for_each(|(x, y)| *x += c * y);
                }
            }
            let c = q[(l, keep)] * fk;
            if c != zero {
                f.iter_mut().zip(v).for_each(|(x, y)| *x += c * y);
            }
        }
        f.iter_mut().zip(&self.basis[size]).for_each(|(x, y)| *x += fm * y);
        // restore orthogonality of the residual lost to rounding in the update
        for v in &new_basis {
            let c = dotc(v, &f);
            f.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
        }
        let nf = norm2(&f);
        self.h = Mat::zeros(self.h.nrows(), self.h.ncols());
        for j in 0..keep {
            for i in 0..=(j + 1).min(keep - 1) {
                self.h[(i, j)] = h[(i, j)];
            }
        }
        self.basis = new_basis;
        if nf == 0.0 {
            return Err(Error::Convergence {
                restarts: 0,
                best_residuals: Vec::new(),
            });
        }
        f.iter_mut().for_each(|x| *x /= nf);
        self.h[(keep, keep - 1)] = C64::new(nf, 0.0);
        self.basis.push(f);
        Ok(())
    }

    fn finish(
        &mut self,
        a: &SparseMatrixC,
        ritz: &RitzSystem,
        size: usize,
        take: usize,
        count: usize,
        restarts: usize,
    ) -> Result<PencilEigenSet> {
        let n = a.dim();
        let mut found = Vec::with_capacity(take);
        for &s in ritz.order.iter().take(take) {
            let theta = ritz.values[s];
            let mut x = vec![C64::new(0.0, 0.0); n];
            for (l, v) in self.basis.iter().take(size).enumerate() {
                let c = ritz.vectors[(l, s)];
                x.iter_mut().zip(v).for_each(|(xi, vi)| *xi += c * vi);
            }
            // one more application damps components outside the operator's range
            let mut x = self.apply(&x)?;
            x.iter_mut().for_each(|xi| *xi /= theta);
            found.push((C64::new(-1.0, 0.0) / theta, x));
        }
        found.sort_by(|p, q| p.0.norm().total_cmp(&q.0.norm()));
        // a real symmetric pencil has real eigenpairs; drop rounding noise
        let real = a.max_imag() == 0.0 && self.b.max_imag() == 0.0;
        if real {
            found.iter_mut().for_each(|p| p.0.im = 0.0);
        }
        let candidates: Vec<C64> = found.iter().map(|p| p.0).collect();
        found.truncate(count);

        let mut pairs: Vec<EigenPair> = found
            .into_iter()
            .map(|(lambda, x)| normalized_pair(a, self.b, lambda, x, real))
            .collect();
        pairs.sort_by(|p, q| report_order(&p.lambda, &q.lambda));
        Ok(PencilEigenSet {
            pairs,
            candidates,
            restarts,
            operator_applications: self.ops,
        })
    }
}

/// Scales to `ûᴴ B û = 1`, rotates the largest boundary coefficient onto the
/// positive real axis and records the residual.
fn normalized_pair(a: &SparseMatrixC, b: &SparseMatrixC, lambda: C64, mut x: Vec<C64>, real: bool) -> EigenPair {
    let bx = b.matvec(&x);
    let energy = dotc(&x, &bx).re;
    if energy > 0.0 {
        let s = energy.sqrt();
        x.iter_mut().for_each(|v| *v /= s);
    }
    let mut pivot = None;
    let mut largest = 0.0;
    for (i, v) in x.iter().enumerate() {
        if b.get(i, i).re > 0.0 && v.norm() > largest {
            largest = v.norm();
            pivot = Some(i);
        }
    }
    if let Some(i) = pivot {
        let phase = x[i].conj() / x[i].norm();
        x.iter_mut().for_each(|v| *v *= phase);
        x[i] = C64::new(x[i].norm(), 0.0);
    }
    if real {
        x.iter_mut().for_each(|v| v.im = 0.0);
    }
    let residual = pencil_residual(a, b, lambda, &x);
    EigenPair {
        lambda,
        vector: x,
        residual,
    }
}

/// `‖A û + λ B û‖₂ / ‖A û‖₂`
pub fn pencil_residual(a: &SparseMatrixC, b: &SparseMatrixC, lambda: C64, u: &[C64]) -> f64 {
    let au = a.matvec(u);
    let bu = b.matvec(u);
    let r: Vec<C64> = au.iter().zip(&bu).map(|(p, q)| p + lambda * q).collect();
    norm2(&r) / norm2(&au)
}

struct RitzSystem {
    values: Vec<C64>,
    vectors: Mat<C64>,
    /// indices by decreasing `|θ|`
    order: Vec<usize>,
    size: usize,
}

impl RitzSystem {
    fn new(h: &Mat<C64>, size: usize) -> Result<Self> {
        let small = Mat::<C64>::from_fn(size, size, |i, j| h[(i, j)]);
        let evd = small.eigen().map_err(|_| Error::Convergence {
            restarts: 0,
            best_residuals: Vec::new(),
        })?;
        let values: Vec<C64> = (0..size).map(|i| evd.S().column_vector()[i]).collect();
        let mut vectors = evd.U().to_owned();
        for j in 0..size {
            let nrm = (0..size).map(|i| vectors[(i, j)].norm_sqr()).sum::<f64>().sqrt();
            if nrm > 0.0 {
                for i in 0..size {
                    vectors[(i, j)] /= nrm;
                }
            }
        }
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by(|&p, &q| values[q].norm().total_cmp(&values[p].norm()).then(p.cmp(&q)));
        Ok(Self {
            values,
            vectors,
            order,
            size,
        })
    }

    fn nonzero_count(&self) -> usize {
        let top = self.values[self.order[0]].norm();
        self.order
            .iter()
            .filter(|&&i| self.values[i].norm() > 1e-12 * top)
            .count()
    }

    /// Relative Ritz estimate `β |e_mᵀ y| / |θ|` of the `rank`-th largest value.
    fn estimate(&self, rank: usize, beta: f64) -> f64 {
        let s = self.order[rank];
        beta * self.vectors[(self.size - 1, s)].norm() / self.values[s].norm()
    }
}

/// One implicit single-shift QR sweep on the upper Hessenberg `h`,
/// accumulating the unitary similarity into `q`.
fn qr_sweep(h: &mut Mat<C64>, q: &mut Mat<C64>, shift: C64) {
    let size = h.nrows();
    for i in 0..size - 1 {
        let (x, y) = if i == 0 {
            (h[(0, 0)] - shift, h[(1, 0)])
        } else {
            (h[(i, i - 1)], h[(i + 1, i - 1)])
        };
        let (c, s) = givens(x, y);
        // rows i, i+1 ← G [row i; row i+1]
        for col in i.saturating_sub(1)..size {
            let a = h[(i, col)];
            let b = h[(i + 1, col)];
            h[(i, col)] = c * a + s * b;
            h[(i + 1, col)] = -s.conj() * a + c * b;
        }
        // columns i, i+1 ← [col i, col i+1] Gᴴ
        for row in 0..(i + 3).min(size) {
            let a = h[(row, i)];
            let b = h[(row, i + 1)];
            h[(row, i)] = c * a + s.conj() * b;
            h[(row, i + 1)] = -s * a + c * b;
        }
        for row in 0..size {
            let a = q[(row, i)];
            let b = q[(row, i + 1)];
            q[(row, i)] = c * a + s.conj() * b;
            q[(row, i + 1)] = -s * a + c * b;
        }
        if i > 0 {
            h[(i + 1, i - 1)] = C64::new(0.0, 0.0);
        }
    }
}

/// Rotation `[c s; −s̄ c]` with real `c` mapping `(x, y)` to `(r, 0)`.
fn givens(x: C64, y: C64) -> (C64, C64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    }
    if ax == 0.0 {
        return (C64::new(0.0, 0.0), y.conj() / ay);
    }
    let r = ax.hypot(ay);
    let c = ax / r;
    let s = (x / ax) * y.conj() / r;
    (C64::new(c, 0.0), s)
}

/// All eigenvalues of `A⁻¹ B` for dense `A`, `B`, i.e. the reciprocals of the
/// pencil eigenvalues `μ`. Used as a test oracle.
#[derive(Debug, Clone)]
pub struct DenseSpectrum {
    pub reciprocals: Vec<C64>,
    /// Both input matrices were real.
    pub real: bool,
}

impl DenseSpectrum {
    /// Finite `μ` (those with `|θ|` above `1e-10·max|θ|`), by increasing `|μ|`.
    pub fn finite(&self) -> Vec<C64> {
        let top = self.reciprocals.iter().map(|t| t.norm()).fold(0.0, f64::max);
        let mut mu: Vec<C64> = self
            .reciprocals
            .iter()
            .filter(|t| t.norm() > 1e-10 * top)
            .map(|t| C64::new(1.0, 0.0) / t)
            .collect();
        mu.sort_by(|p, q| p.norm().total_cmp(&q.norm()));
        mu
    }

    /// The `count` smallest-|μ| values as `λ = −μ`, in reporting order.
    pub fn smallest_lambdas(&self, count: usize) -> Vec<C64> {
        let mut l: Vec<C64> = self
            .finite()
            .into_iter()
            .take(count)
            .map(|m| if self.real { C64::new(-m.re, 0.0) } else { -m })
            .collect();
        l.sort_by(report_order);
        l
    }
}

/// Dense reduction to `A⁻¹ B` followed by a nonsymmetric eigensolve.
pub fn dense_oracle_eig(a: &[Vec<C64>], b: &[Vec<C64>]) -> Result<DenseSpectrum> {
    let n = a.len();
    if n > 2000 || b.len() != n || a.iter().chain(b).any(|r| r.len() != n) {
        return Err(Error::invalid(
            "dense oracle needs two square matrices of equal size ≤ 2000",
        ));
    }
    let am = Mat::<C64>::from_fn(n, n, |i, j| a[i][j]);
    let bm = Mat::<C64>::from_fn(n, n, |i, j| b[i][j]);
    let lu = am.partial_piv_lu();
    let x = faer::linalg::solvers::Solve::solve(&lu, &bm);
    let residual = (&am * &x - &bm).norm_l2();
    if !residual.is_finite() || residual > 1e-8 * bm.norm_l2().max(1.0) {
        return Err(Error::Singular { pivot: None });
    }
    let reciprocals = x.eigenvalues().map_err(|_| Error::Convergence {
        restarts: 0,
        best_residuals: Vec::new(),
    })?;
    let real = a.iter().chain(b).flatten().all(|v| v.im == 0.0);
    Ok(DenseSpectrum { reciprocals, real })
}
