use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::sparse::linalg::{LltError, LuError};
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use faer::{Conj, MatMut, Side};

use super::ldlt::{SymmetricLdlt, PIVOT_TOL};
use crate::error::{Error, Result};
use crate::linalg::{norm2, SparseMatrixC, Symmetry};
use crate::C64;

/// Which system [`LuFactorization::solve`] solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    /// `A x = b`
    Normal,
    /// `Aᴴ x = b`
    ConjugateTranspose,
}

#[derive(Debug)]
enum Backend {
    Symmetric(SymmetricLdlt),
    Pivoted(Box<Lu<usize, C64>>),
}

/// Sparse direct factorization of a square complex matrix.
///
/// Symmetric matrices are factorized as `P A Pᵀ = L D Lᵀ` under a minimum
/// degree ordering, which halves storage and work compared with a general LU.
/// When the matrix is not symmetric, or a symmetric pivot is too small, a
/// row-pivoted sparse LU is used instead.
#[derive(Debug)]
pub struct LuFactorization {
    dim: usize,
    backend: Backend,
}

impl LuFactorization {
    pub fn new(a: &SparseMatrixC) -> Result<Self> {
        let dim = a.dim();
        if a.symmetry().is_symmetric() {
            match SymmetricLdlt::factorize(a) {
                Ok(f) => {
                    return Ok(Self {
                        dim,
                        backend: Backend::Symmetric(f),
                    })
                }
                Err(Error::Singular { pivot }) => {
                    log::debug!("symmetric pivot {pivot:?} too small; using pivoted LU");
                }
                Err(e) => return Err(e),
            }
        }
        Self::pivoted(a)
    }

    /// Row-pivoted LU regardless of symmetry.
    pub fn pivoted(a: &SparseMatrixC) -> Result<Self> {
        let dim = a.dim();
        let csc = to_faer_csc(a)?;
        let lu = csc.sp_lu().map_err(|e| match e {
            LuError::SymbolicSingular { index } => Error::Singular { pivot: Some(index) },
            LuError::Generic(g) => Error::Capacity(format!("sparse LU failed: {g:?}")),
        })?;
        let f = Self {
            dim,
            backend: Backend::Pivoted(Box::new(lu)),
        };
        f.check_pivots(a)?;
        Ok(f)
    }

    // The pivoted backend does not report tiny pivots, so probe the factors
    // with a known solution instead.
    fn check_pivots(&self, a: &SparseMatrixC) -> Result<()> {
        if self.dim == 0 {
            return Ok(());
        }
        let x: Vec<C64> = (0..self.dim)
            .map(|i| C64::new(1.0 + (i % 7) as f64 * 0.1, (i % 3) as f64 * 0.05))
            .collect();
        let mut b = a.matvec(&x);
        self.solve_in_place(&mut b, SolveMode::Normal)?;
        let err: Vec<C64> = b.iter().zip(&x).map(|(p, q)| p - q).collect();
        let rel = norm2(&err) / norm2(&x);
        if !rel.is_finite() || rel > 1.0 / (PIVOT_TOL * 1e6) {
            return Err(Error::Singular { pivot: None });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `true` when the symmetric `L D Lᵀ` path was taken.
    pub fn is_symmetric(&self) -> bool {
        matches!(self.backend, Backend::Symmetric(_))
    }

    pub fn symmetric_factor(&self) -> Option<&SymmetricLdlt> {
        match &self.backend {
            Backend::Symmetric(f) => Some(f),
            Backend::Pivoted(_) => None,
        }
    }

    pub fn solve(&self, rhs: &[C64], mode: SolveMode) -> Result<Vec<C64>> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x, mode)?;
        Ok(x)
    }

    pub fn solve_in_place(&self, x: &mut [C64], mode: SolveMode) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::invalid(format!(
                "right-hand side has length {}, matrix dimension is {}",
                x.len(),
                self.dim
            )));
        }
        match (&self.backend, mode) {
            (Backend::Symmetric(f), SolveMode::Normal) => f.solve_in_place(x),
            // Aᴴ = conj(A) when Aᵀ = A
            (Backend::Symmetric(f), SolveMode::ConjugateTranspose) => {
                x.iter_mut().for_each(|v| *v = v.conj());
                f.solve_in_place(x);
                x.iter_mut().for_each(|v| *v = v.conj());
            }
            (Backend::Pivoted(lu), SolveMode::Normal) => {
                lu.solve_in_place_with_conj(Conj::No, column(x));
            }
            (Backend::Pivoted(lu), SolveMode::ConjugateTranspose) => {
                lu.solve_transpose_in_place_with_conj(Conj::Yes, column(x));
            }
        }
        Ok(())
    }
}

fn column(x: &mut [C64]) -> MatMut<'_, C64> {
    let n = x.len();
    MatMut::from_column_major_slice_mut(x, n, 1)
}

fn to_faer_csc(a: &SparseMatrixC) -> Result<SparseColMat<usize, C64>> {
    // CSC of A is the CSR layout of Aᵀ
    let t = a.transpose();
    let n = a.dim();
    let symbolic = SymbolicSparseColMat::new_checked(n, n, t.row_ptr().to_vec(), None, t.col_idx().to_vec());
    Ok(SparseColMat::new(symbolic, t.values().to_vec()))
}

/// Sparse Cholesky factorization of a real symmetric positive definite matrix.
#[derive(Debug)]
pub struct SpdFactorization {
    dim: usize,
    llt: Llt<usize, f64>,
}

impl SpdFactorization {
    /// Factorizes `Re S`. The imaginary parts must vanish to the
    /// `RealSymmetric` tolerance.
    pub fn new(s: &SparseMatrixC) -> Result<Self> {
        if s.symmetry() != Symmetry::RealSymmetric {
            return Err(Error::invalid("SPD solve needs a matrix flagged RealSymmetric"));
        }
        if s.max_imag() > 1e-14 * s.max_abs() {
            return Err(Error::invalid("matrix flagged RealSymmetric has imaginary entries"));
        }
        let n = s.dim();
        let t = s.transpose();
        let symbolic = SymbolicSparseColMat::new_checked(n, n, t.row_ptr().to_vec(), None, t.col_idx().to_vec());
        let csc = SparseColMat::new(symbolic, t.values().iter().map(|v| v.re).collect());
        let llt = csc.sp_cholesky(Side::Lower).map_err(|e| match e {
            LltError::Numeric(faer::linalg::cholesky::llt::factor::LltError::NonPositivePivot { index }) => {
                Error::NotSpd { pivot: index }
            }
            LltError::Generic(g) => Error::Capacity(format!("sparse Cholesky failed: {g:?}")),
        })?;
        Ok(Self { dim: n, llt })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Solves with real and imaginary parts as two columns of one solve.
    pub fn solve(&self, rhs: &[C64]) -> Result<Vec<C64>> {
        if rhs.len() != self.dim {
            return Err(Error::invalid("right-hand side dimension mismatch"));
        }
        let n = self.dim;
        let mut buf: Vec<f64> = rhs.iter().map(|v| v.re).chain(rhs.iter().map(|v| v.im)).collect();
        self.llt
            .solve_in_place_with_conj(Conj::No, MatMut::from_column_major_slice_mut(&mut buf, n, 2));
        Ok((0..n).map(|i| C64::new(buf[i], buf[n + i])).collect())
    }
}

/// One-shot SPD solve.
pub fn spd_solve(s: &SparseMatrixC, rhs: &[C64]) -> Result<Vec<C64>> {
    SpdFactorization::new(s)?.solve(rhs)
}
