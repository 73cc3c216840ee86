use std::io::Write;

use crate::error::{Error, Result};
use crate::C64;

/// Symmetry flag carried by a [`SparseMatrixC`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    /// `Aᵀ = A` with complex entries (not Hermitian).
    ComplexSymmetric,
    /// Symmetric with (numerically) real entries.
    RealSymmetric,
    None,
}

impl Symmetry {
    pub fn is_symmetric(self) -> bool {
        self != Symmetry::None
    }
}

/// Square complex matrix in compressed sparse row layout. Column indices are
/// sorted and unique within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrixC {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
    symmetry: Symmetry,
}

impl SparseMatrixC {
    /// Builds from raw CSR arrays, checking their consistency.
    pub fn from_csr(
        dim: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<C64>,
        symmetry: Symmetry,
    ) -> Result<Self> {
        if row_ptr.len() != dim + 1 || row_ptr[0] != 0 || row_ptr[dim] != col_idx.len() {
            return Err(Error::invalid("inconsistent CSR row pointers"));
        }
        if values.len() != col_idx.len() {
            return Err(Error::invalid("CSR values and indices differ in length"));
        }
        for r in 0..dim {
            let cols = &col_idx[row_ptr[r]..row_ptr[r + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) || cols.last().is_some_and(|&c| c >= dim) {
                return Err(Error::invalid(format!("row {r} has unsorted or out-of-range columns")));
            }
        }
        Ok(Self {
            dim,
            row_ptr,
            col_idx,
            values,
            symmetry,
        })
    }

    /// Sums duplicate entries; the result is independent of triplet order up to
    /// floating-point summation order, which follows the input order.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, C64)], symmetry: Symmetry) -> Result<Self> {
        if let Some(&(r, c, _)) = triplets.iter().find(|t| t.0 >= dim || t.1 >= dim) {
            return Err(Error::invalid(format!("entry ({r}, {c}) outside a {dim}×{dim} matrix")));
        }
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for k in order {
            let (r, c, v) = triplets[k];
            if last == Some((r, c)) {
                *values.last_mut().expect("previous entry") += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self {
            dim,
            row_ptr,
            col_idx,
            values,
            symmetry,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: (0..=dim).collect(),
            col_idx: (0..dim).collect(),
            values: vec![C64::new(1.0, 0.0); dim],
            symmetry: Symmetry::RealSymmetric,
        }
    }

    /// Dense row-major input; exact zeros are dropped.
    pub fn from_dense(rows: &[Vec<C64>], symmetry: Symmetry) -> Result<Self> {
        let dim = rows.len();
        let mut t = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::invalid("dense input is not square"));
            }
            for (j, &v) in row.iter().enumerate() {
                if v != C64::new(0.0, 0.0) {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(dim, &t, symmetry)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn with_symmetry(mut self, symmetry: Symmetry) -> Self {
        self.symmetry = symmetry;
        self
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// `(column, value)` pairs of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim, "matvec dimension mismatch");
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *out = acc;
        }
    }

    /// `y = Aᴴ x`
    pub fn matvec_adjoint(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.dim, "matvec dimension mismatch");
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        for (r, &xr) in x.iter().enumerate() {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                y[self.col_idx[k]] += self.values[k].conj() * xr;
            }
        }
        y
    }

    /// `vᴴ A u`, the discrete sesquilinear form `a(u, v)`.
    pub fn form(&self, u: &[C64], v: &[C64]) -> C64 {
        let au = self.matvec(u);
        v.iter().zip(&au).map(|(vi, ai)| vi.conj() * ai).sum()
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.dim + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for i in 0..self.dim {
            counts[i + 1] += counts[i];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![C64::new(0.0, 0.0); self.nnz()];
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[k];
                let slot = next[c];
                col_idx[slot] = r;
                values[slot] = self.values[k];
                next[c] += 1;
            }
        }
        Self {
            dim: self.dim,
            row_ptr,
            col_idx,
            values,
            symmetry: self.symmetry,
        }
    }

    /// `alpha·self + beta·other`.
    pub fn lin_comb(&self, alpha: C64, other: &SparseMatrixC, beta: C64, symmetry: Symmetry) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::invalid("matrix dimensions differ"));
        }
        if self.row_ptr == other.row_ptr && self.col_idx == other.col_idx {
            let values = self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| alpha * a + beta * b)
                .collect();
            return Ok(Self {
                dim: self.dim,
                row_ptr: self.row_ptr.clone(),
                col_idx: self.col_idx.clone(),
                values,
                symmetry,
            });
        }
        let mut t = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.dim {
            t.extend(self.row(r).map(|(c, v)| (r, c, alpha * v)));
            t.extend(other.row(r).map(|(c, v)| (r, c, beta * v)));
        }
        Self::from_triplets(self.dim, &t, symmetry)
    }

    pub fn scale(&self, alpha: C64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// Keeps the rows and columns with `keep[i]`; returns the submatrix and the
    /// original index of each retained row.
    pub fn principal_submatrix(&self, keep: &[bool]) -> Result<(Self, Vec<usize>)> {
        if keep.len() != self.dim {
            return Err(Error::invalid("mask length differs from matrix dimension"));
        }
        let map: Vec<usize> = (0..self.dim).filter(|&i| keep[i]).collect();
        let mut new_index = vec![usize::MAX; self.dim];
        for (k, &i) in map.iter().enumerate() {
            new_index[i] = k;
        }
        let mut row_ptr = Vec::with_capacity(map.len() + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for &r in &map {
            for (c, v) in self.row(r) {
                if keep[c] {
                    col_idx.push(new_index[c]);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok((
            Self {
                dim: map.len(),
                row_ptr,
                col_idx,
                values,
                symmetry: self.symmetry,
            },
            map,
        ))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// `max |A_ij − A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let t = self.transpose();
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                worst = worst.max((v - t.get(r, c)).norm());
            }
            for (c, v) in t.row(r) {
                worst = worst.max((v - self.get(r, c)).norm());
            }
        }
        worst
    }

    /// Dense row-major copy, intended for small test problems.
    pub fn to_dense(&self) -> Vec<Vec<C64>> {
        let mut d = vec![vec![C64::new(0.0, 0.0); self.dim]; self.dim];
        for (r, row) in d.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] = v;
            }
        }
        d
    }

    /// Coordinate text dump: header `dim nnz`, then `i j re im` per entry.
    pub fn write_coordinate<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {}", self.dim, self.nnz())?;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                writeln!(out, "{r} {c} {:e} {:e}", v.re, v.im)?;
            }
        }
        Ok(())
    }
}

/// Euclidean norm of a complex vector.
pub fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// `yᴴ x`
pub fn dotc(y: &[C64], x: &[C64]) -> C64 {
    y.iter().zip(x).map(|(a, b)| a.conj() * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn triplets_sum_duplicates() {
        let m = SparseMatrixC::from_triplets(
            2,
            &[(0, 0, c(1.0, 0.0)), (1, 0, c(2.0, 1.0)), (0, 0, c(0.5, 0.0))],
            Symmetry::None,
        )
        .unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 0), c(1.5, 0.0));
        assert_eq!(m.get(1, 0), c(2.0, 1.0));
        assert_eq!(m.get(0, 1), c(0.0, 0.0));
    }

    #[test]
    fn adjoint_matches_dense() {
        let m = SparseMatrixC::from_dense(
            &[vec![c(1.0, 2.0), c(0.0, 1.0)], vec![c(3.0, 0.0), c(4.0, -1.0)]],
            Symmetry::None,
        )
        .unwrap();
        let x = [c(1.0, 1.0), c(-2.0, 0.5)];
        let y = m.matvec_adjoint(&x);
        let yt = m.transpose().matvec(&x.map(|v| v.conj()));
        for (a, b) in y.iter().zip(&yt) {
            assert!((a - b.conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn principal_submatrix_drops_rows_and_columns() {
        let m = SparseMatrixC::from_dense(
            &[
                vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)],
                vec![c(4.0, 0.0), c(5.0, 0.0), c(6.0, 0.0)],
                vec![c(7.0, 0.0), c(8.0, 0.0), c(9.0, 0.0)],
            ],
            Symmetry::None,
        )
        .unwrap();
        let (s, map) = m.principal_submatrix(&[true, false, true]).unwrap();
        assert_eq!(map, vec![0, 2]);
        assert_eq!(
            s.to_dense(),
            vec![vec![c(1.0, 0.0), c(3.0, 0.0)], vec![c(7.0, 0.0), c(9.0, 0.0)]]
        );
    }

    #[test]
    fn coordinate_dump_header() {
        let m = SparseMatrixC::identity(3);
        let mut buf = Vec::new();
        m.write_coordinate(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("3 3\n0 0 1e0 0e0\n"));
    }
}
