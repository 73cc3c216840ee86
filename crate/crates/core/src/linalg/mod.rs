//! Sparse complex matrices, direct solvers and the shift-invert eigensolver.

mod arnoldi;
mod ldlt;
mod lu;
mod sparse;

pub use arnoldi::{
    arnoldi_smallest, arnoldi_smallest_with, dense_oracle_eig, pencil_residual, report_order, ArnoldiOptions,
    DenseSpectrum, EigenPair, PencilEigenSet,
};
pub use ldlt::SymmetricLdlt;
pub use lu::{spd_solve, LuFactorization, SolveMode, SpdFactorization};
pub use sparse::{dotc, norm2, SparseMatrixC, Symmetry};
