//! Sparse `L·D·Lᵀ` factorization for complex symmetric matrices.
//!
//! No pivoting is performed; the pivot sequence is fixed by a fill-reducing
//! approximate minimum degree ordering. Complex symmetric matrices arising from
//! the Helmholtz-type operator are factorizable in this way in practice, and
//! [`super::LuFactorization`] falls back to partial pivoting whenever a pivot
//! is too small.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::sparse::linalg::amd;
use faer::sparse::SymbolicSparseColMatRef;

use crate::error::{Error, Result};
use crate::linalg::SparseMatrixC;
use crate::C64;

const NONE: usize = usize::MAX;

/// Relative pivot threshold below which the factorization is rejected.
pub(crate) const PIVOT_TOL: f64 = 1e-14;

/// `P A Pᵀ = L D Lᵀ`, with `L` unit lower triangular stored by columns.
#[derive(Debug, Clone)]
pub struct SymmetricLdlt {
    dim: usize,
    /// `perm[k]` is the original index of the `k`-th pivot.
    perm: Vec<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<u32>,
    values: Vec<C64>,
    diag: Vec<C64>,
}

/// Fill-reducing order for the symmetric pattern of `a`.
pub(crate) fn amd_order(a: &SparseMatrixC) -> Result<Vec<usize>> {
    let n = a.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    // upper triangle in column-major layout equals the lower triangle of the CSR rows
    let mut col_ptr = Vec::with_capacity(n + 1);
    let mut row_idx = Vec::with_capacity(a.nnz() / 2 + n);
    col_ptr.push(0usize);
    for r in 0..n {
        row_idx.extend(a.row(r).map(|(c, _)| c).filter(|&c| c <= r));
        col_ptr.push(row_idx.len());
    }
    let symbolic = SymbolicSparseColMatRef::new_checked(n, n, &col_ptr, None, &row_idx);
    let mut perm = vec![0usize; n];
    let mut perm_inv = vec![0usize; n];
    let mut mem = MemBuffer::new(amd::order_scratch::<usize>(n, row_idx.len()));
    amd::order(
        &mut perm,
        &mut perm_inv,
        symbolic,
        amd::Control::default(),
        MemStack::new(&mut mem),
    )
    .map_err(|e| Error::Capacity(format!("ordering failed: {e:?}")))?;
    Ok(perm)
}

impl SymmetricLdlt {
    /// Factorizes a matrix whose values are symmetric (`Aᵀ = A`). The caller
    /// is responsible for the symmetry; only the lower triangle is read.
    pub fn factorize(a: &SparseMatrixC) -> Result<Self> {
        let perm = amd_order(a)?;
        Self::factorize_with_order(a, perm)
    }

    pub fn factorize_with_order(a: &SparseMatrixC, perm: Vec<usize>) -> Result<Self> {
        let n = a.dim();
        if perm.len() != n {
            return Err(Error::invalid("ordering length differs from matrix dimension"));
        }
        if n > u32::MAX as usize {
            return Err(Error::Capacity(format!("dimension {n} exceeds the factor index range")));
        }
        let mut pinv = vec![NONE; n];
        for (k, &p) in perm.iter().enumerate() {
            pinv[p] = k;
        }

        // symbolic: elimination tree and column counts
        let mut parent = vec![NONE; n];
        let mut flag = vec![NONE; n];
        let mut counts = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            for (j, _) in a.row(perm[k]) {
                let mut i = pinv[j];
                if i >= k {
                    continue;
                }
                while flag[i] != k {
                    if parent[i] == NONE {
                        parent[i] = k;
                    }
                    counts[i] += 1;
                    flag[i] = k;
                    i = parent[i];
                }
            }
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        col_ptr.push(0usize);
        for &c in &counts {
            col_ptr.push(col_ptr.last().expect("nonempty") + c);
        }
        let nnz = col_ptr[n];
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        row_idx
            .try_reserve_exact(nnz)
            .and_then(|_| values.try_reserve_exact(nnz))
            .map_err(|_| Error::Capacity(format!("factor with {nnz} entries does not fit in memory")))?;
        row_idx.resize(nnz, 0u32);
        values.resize(nnz, C64::new(0.0, 0.0));

        // numeric: up-looking, one row of L per step
        let zero = C64::new(0.0, 0.0);
        let mut diag = vec![zero; n];
        let mut y = vec![zero; n];
        let mut pattern = vec![0usize; n];
        let mut fill = vec![0usize; n];
        flag.iter_mut().for_each(|f| *f = NONE);
        for k in 0..n {
            let mut top = n;
            flag[k] = k;
            let mut scale: f64 = 0.0;
            for (j, v) in a.row(perm[k]) {
                let mut i = pinv[j];
                if i > k {
                    continue;
                }
                scale = scale.max(v.norm());
                y[i] += v;
                let mut len = 0;
                while flag[i] != k {
                    pattern[len] = i;
                    len += 1;
                    flag[i] = k;
                    i = parent[i];
                }
                while len > 0 {
                    top -= 1;
                    len -= 1;
                    pattern[top] = pattern[len];
                }
            }
            let mut d = y[k];
            y[k] = zero;
            for &i in &pattern[top..n] {
                let yi = y[i];
                y[i] = zero;
                let start = col_ptr[i];
                let end = start + fill[i];
                for p in start..end {
                    y[row_idx[p] as usize] -= values[p] * yi;
                }
                let lki = yi / diag[i];
                d -= lki * yi;
                row_idx[end] = k as u32;
                values[end] = lki;
                fill[i] += 1;
            }
            if !(d.norm() > PIVOT_TOL * scale) {
                return Err(Error::Singular { pivot: Some(perm[k]) });
            }
            diag[k] = d;
        }
        Ok(Self {
            dim: n,
            perm,
            col_ptr,
            row_idx,
            values,
            diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Stored off-diagonal entries of `L`.
    pub fn factor_nnz(&self) -> usize {
        self.values.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [C64]) {
        assert_eq!(b.len(), self.dim, "right-hand side dimension mismatch");
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..self.dim {
            let xi = x[i];
            for p in self.col_ptr[i]..self.col_ptr[i + 1] {
                x[self.row_idx[p] as usize] -= self.values[p] * xi;
            }
        }
        for (xi, d) in x.iter_mut().zip(&self.diag) {
            *xi /= d;
        }
        for i in (0..self.dim).rev() {
            let mut acc = x[i];
            for p in self.col_ptr[i]..self.col_ptr[i + 1] {
                acc -= self.values[p] * x[self.row_idx[p] as usize];
            }
            x[i] = acc;
        }
        for (k, &p) in self.perm.iter().enumerate() {
            b[p] = x[k];
        }
    }

    /// Dense `Pᵀ L D Lᵀ P`, for verifying small factorizations.
    pub fn reconstruct_dense(&self) -> Vec<Vec<C64>> {
        let n = self.dim;
        let zero = C64::new(0.0, 0.0);
        let mut l = vec![vec![zero; n]; n];
        for (i, row) in l.iter_mut().enumerate() {
            row[i] = C64::new(1.0, 0.0);
        }
        for (j, span) in self.col_ptr.windows(2).enumerate() {
            for p in span[0]..span[1] {
                l[self.row_idx[p] as usize][j] = self.values[p];
            }
        }
        let mut out = vec![vec![zero; n]; n];
        for r in 0..n {
            for c in 0..=r {
                let s: C64 = (0..=c).map(|t| l[r][t] * self.diag[t] * l[c][t]).sum();
                out[self.perm[r]][self.perm[c]] = s;
                out[self.perm[c]][self.perm[r]] = s;
            }
        }
        out
    }
}
