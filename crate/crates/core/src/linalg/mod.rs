//! Shared numerical kernels: sparse SPD solves, shifted solves, dense
//! symmetric and generalized eigendecompositions, SPD fractional powers, and
//! Gram-Schmidt orthonormalization in the mass inner product.

mod eig;
mod gram;
mod solve;

pub use eig::{
    dense_cholesky, dense_sym_eig, gen_eig, gen_eig_dense, gen_eig_with_cap, spd_fractional_power,
    DenseSymEig, GenEigBasis, TRUTH_CAP,
};
pub use gram::{m_gram_schmidt, MgsResult};
pub use solve::{cg_solve, shifted_solve, sparse_solve_spd, SolveMethod, SolveOptions};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("conjugate gradients failed to converge in {iterations} iterations (relative residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },
    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite (eigenvalue {0:.3e})")]
    NotPositiveDefinite(f64),
    #[error("Jacobi eigensolver did not reach tolerance in {0} sweeps")]
    JacobiStalled(usize),
    #[error("truth solver is desk-scale only: dimension {n} exceeds cap {cap}")]
    TruthScale { n: usize, cap: usize },
    #[error("all vectors were dropped; basis is empty")]
    EmptyBasis,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("fractional exponent {0} outside [-1, 1]")]
    ExponentOutOfRange(f64),
    #[error("shift parameter must be nonnegative, got {0}")]
    NegativeShift(f64),
    #[error(transparent)]
    Sparse(#[from] crate::sparse::SparseError),
}
