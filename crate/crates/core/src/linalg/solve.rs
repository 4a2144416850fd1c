//! SPD linear solves: diagonally preconditioned conjugate gradients with a
//! sparse direct (envelope Cholesky) path, and the shifted reaction-diffusion
//! solve `(M + t^2 A) v = M f` behind every snapshot.

use ndarray::Array1;

use super::LinalgError;
use crate::sparse::{EnvelopeCholesky, SparseSymMatrix};
use crate::DofVector;

/// Largest dimension the direct path accepts before falling back to CG.
const DIRECT_DIM_CAP: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMethod {
    /// Direct Cholesky up to the dimension cap, conjugate gradients beyond.
    #[default]
    Auto,
    ConjugateGradient,
    Direct,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub method: SolveMethod,
    /// Relative residual target for the iterative path. Snapshot solves must
    /// sit far below the reduced basis errors being measured.
    pub rel_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            method: SolveMethod::Auto,
            rel_tol: 1e-12,
        }
    }
}

/// Solves `B x = b` for SPD `B` with `||Bx - b|| <= tol * ||b||`.
pub fn sparse_solve_spd(
    b_mat: &SparseSymMatrix,
    rhs: &DofVector,
    opts: &SolveOptions,
) -> Result<DofVector, LinalgError> {
    if b_mat.dim() != rhs.len() {
        return Err(LinalgError::DimensionMismatch(b_mat.dim(), rhs.len()));
    }
    let direct = match opts.method {
        SolveMethod::Direct => true,
        SolveMethod::ConjugateGradient => false,
        SolveMethod::Auto => b_mat.dim() <= DIRECT_DIM_CAP,
    };
    if direct {
        let chol = EnvelopeCholesky::factor(b_mat)?;
        Ok(chol.solve(&rhs.view()))
    } else {
        let n = b_mat.dim();
        cg_solve(b_mat, rhs, opts.rel_tol, 10 * n).map(|(x, _)| x)
    }
}

/// Diagonally preconditioned conjugate gradients. Returns the solution and
/// the iteration count.
pub fn cg_solve(
    b_mat: &SparseSymMatrix,
    rhs: &DofVector,
    rel_tol: f64,
    max_iter: usize,
) -> Result<(DofVector, usize), LinalgError> {
    let n = b_mat.dim();
    let rhs_norm = rhs.dot(rhs).sqrt();
    if rhs_norm == 0.0 {
        return Ok((Array1::zeros(n), 0));
    }
    let diag = b_mat.diagonal();
    let inv_diag = diag.mapv(|d| if d > 0.0 { 1.0 / d } else { 1.0 });

    let mut x = Array1::zeros(n);
    let mut r = rhs.clone();
    let mut z = &inv_diag * &r;
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    for iter in 0..max_iter {
        let residual = r.dot(&r).sqrt();
        if residual <= rel_tol * rhs_norm {
            return Ok((x, iter));
        }
        let ap = b_mat.matvec(&p.view());
        let alpha = rz / p.dot(&ap);
        x = &x + &(alpha * &p);
        r = &r - &(alpha * &ap);
        z = &inv_diag * &r;
        let rz_new = r.dot(&z);
        let beta = rz_new / rz;
        p = &z + &(beta * &p);
        rz = rz_new;
    }
    let residual = r.dot(&r).sqrt() / rhs_norm;
    if residual <= rel_tol {
        Ok((x, max_iter))
    } else {
        Err(LinalgError::Convergence {
            iterations: max_iter,
            residual,
        })
    }
}

/// Solves the shifted problem `(M + t^2 A) v = M f`.
///
/// The `t = 0` snapshot is handled symbolically: `v(0) = f` without a solve.
pub fn shifted_solve(
    m: &SparseSymMatrix,
    a: &SparseSymMatrix,
    t: f64,
    f: &DofVector,
    opts: &SolveOptions,
) -> Result<DofVector, LinalgError> {
    if t < 0.0 || !t.is_finite() {
        return Err(LinalgError::NegativeShift(t));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    let shifted = SparseSymMatrix::linear_combination(1.0, m, t * t, a)?;
    let rhs = m.matvec(&f.view());
    sparse_solve_spd(&shifted, &rhs, opts)
}
