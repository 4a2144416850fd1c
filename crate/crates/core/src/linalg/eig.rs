//! Dense symmetric eigendecomposition by cyclic Jacobi rotations, the
//! generalized eigenproblem for the (stiffness, mass) pencil, and SPD matrix
//! fractional powers.
//!
//! Jacobi is chosen over QR deliberately: the dense problems here are at most
//! a few hundred rows, and the relative accuracy of small eigenvalues matters
//! once fractional powers are taken.

use ndarray::{Array1, Array2};

use super::LinalgError;
use crate::sparse::SparseSymMatrix;
use crate::DenseMatrix;

/// Largest dimension the truth solver accepts by default.
pub const TRUTH_CAP: usize = 4000;

const JACOBI_MAX_SWEEPS: usize = 64;

/// Eigendecomposition of a dense symmetric matrix: ascending eigenvalues and
/// orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct DenseSymEig {
    pub eigenvalues: Array1<f64>,
    pub eigenvectors: Array2<f64>,
}

impl DenseSymEig {
    /// Applies `f` to each eigenvalue and reassembles `Q f(Lambda) Q^T y`.
    pub fn apply_function(&self, f: impl Fn(f64) -> f64, y: &Array1<f64>) -> Array1<f64> {
        let coeffs = self.eigenvectors.t().dot(y);
        let scaled: Array1<f64> = coeffs
            .iter()
            .zip(self.eigenvalues.iter())
            .map(|(c, &l)| c * f(l))
            .collect();
        self.eigenvectors.dot(&scaled)
    }
}

fn max_abs(b: &DenseMatrix) -> f64 {
    b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

fn check_symmetry(b: &DenseMatrix) -> Result<(), LinalgError> {
    let (r, c) = b.dim();
    if r != c {
        return Err(LinalgError::DimensionMismatch(r, c));
    }
    let scale = max_abs(b).max(1e-300);
    let mut asym = 0.0f64;
    for i in 0..r {
        for j in 0..i {
            asym = asym.max((b[[i, j]] - b[[j, i]]).abs());
        }
    }
    if asym > 1e-12 * scale {
        return Err(LinalgError::NotSymmetric(asym));
    }
    Ok(())
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps run until the off-diagonal Frobenius mass drops below
/// `1e-14 * ||B||_F`. Eigenvalues are returned ascending.
pub fn dense_sym_eig(b: &DenseMatrix) -> Result<DenseSymEig, LinalgError> {
    check_symmetry(b)?;
    let n = b.nrows();
    let mut w = b.clone();
    // Symmetrize exactly so rotations preserve symmetry bit for bit.
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (w[[i, j]] + w[[j, i]]);
            w[[i, j]] = v;
            w[[j, i]] = v;
        }
    }
    // Row-major scratch; eigenvectors accumulate as ROWS of qt so the
    // rotation updates stay on contiguous memory.
    let mut wv: Vec<f64> = w.iter().cloned().collect();
    let mut qt = vec![0.0f64; n * n];
    for i in 0..n {
        qt[i * n + i] = 1.0;
    }
    let frob = wv.iter().map(|v| v * v).sum::<f64>().sqrt();
    let target = 1e-14 * frob;

    let off_mass = |wv: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..i {
                let v = wv[i * n + j];
                s += 2.0 * v * v;
            }
        }
        s.sqrt()
    };

    let mut converged = frob == 0.0 || off_mass(&wv) <= target;
    let mut sweeps = 0;
    while !converged {
        if sweeps >= JACOBI_MAX_SWEEPS {
            return Err(LinalgError::JacobiStalled(sweeps));
        }
        for p in 0..n {
            for qi in (p + 1)..n {
                let apq = wv[p * n + qi];
                if apq == 0.0 {
                    continue;
                }
                let theta = 0.5 * (wv[qi * n + qi] - wv[p * n + p]) / apq;
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Two-sided rotation J^T W J: full row pass (contiguous),
                // then full column pass over the row-rotated matrix.
                {
                    let (head, tail) = wv.split_at_mut(qi * n);
                    let row_p = &mut head[p * n..p * n + n];
                    let row_q = &mut tail[..n];
                    for k in 0..n {
                        let wpk = row_p[k];
                        let wqk = row_q[k];
                        row_p[k] = c * wpk - s * wqk;
                        row_q[k] = s * wpk + c * wqk;
                    }
                }
                for k in 0..n {
                    let wkp = wv[k * n + p];
                    let wkq = wv[k * n + qi];
                    wv[k * n + p] = c * wkp - s * wkq;
                    wv[k * n + qi] = s * wkp + c * wkq;
                }
                wv[p * n + qi] = 0.0;
                wv[qi * n + p] = 0.0;
                {
                    let (head, tail) = qt.split_at_mut(qi * n);
                    let row_p = &mut head[p * n..p * n + n];
                    let row_q = &mut tail[..n];
                    for k in 0..n {
                        let qkp = row_p[k];
                        let qkq = row_q[k];
                        row_p[k] = c * qkp - s * qkq;
                        row_q[k] = s * qkp + c * qkq;
                    }
                }
            }
        }
        sweeps += 1;
        converged = off_mass(&wv) <= target;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| wv[i * n + i].total_cmp(&wv[j * n + j]));
    let eigenvalues: Array1<f64> = order.iter().map(|&i| wv[i * n + i]).collect();
    let mut eigenvectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            eigenvectors[[k, dst]] = qt[src * n + k];
        }
    }
    Ok(DenseSymEig {
        eigenvalues,
        eigenvectors,
    })
}

/// Fractional power `B^s = Q Lambda^s Q^T` of a dense SPD matrix, `s` in `[-1, 1]`.
pub fn spd_fractional_power(b: &DenseMatrix, s: f64) -> Result<DenseMatrix, LinalgError> {
    if !(-1.0..=1.0).contains(&s) {
        return Err(LinalgError::ExponentOutOfRange(s));
    }
    let eig = dense_sym_eig(b)?;
    let lam_min = eig.eigenvalues[0];
    if lam_min <= 0.0 {
        return Err(LinalgError::NotPositiveDefinite(lam_min));
    }
    let n = b.nrows();
    let mut scaled = eig.eigenvectors.clone();
    for j in 0..n {
        let f = eig.eigenvalues[j].powf(s);
        scaled.column_mut(j).mapv_inplace(|v| v * f);
    }
    Ok(scaled.dot(&eig.eigenvectors.t()))
}

/// Dense Cholesky factorization `B = L L^T`, returning lower-triangular `L`.
pub fn dense_cholesky(b: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    check_symmetry(b)?;
    let n = b.nrows();
    let mut l = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut sum = b[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return Err(LinalgError::NotPositiveDefinite(sum));
                }
                l[[i, i]] = sum.sqrt();
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    Ok(l)
}

/// Solves `L X = B` column-wise for lower-triangular `L`.
fn forward_solve_multi(l: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let n = l.nrows();
    let m = b.ncols();
    let mut x = b.clone();
    for col in 0..m {
        for i in 0..n {
            let mut sum = x[[i, col]];
            for k in 0..i {
                sum -= l[[i, k]] * x[[k, col]];
            }
            x[[i, col]] = sum / l[[i, i]];
        }
    }
    x
}

/// Solves `L^T X = B` column-wise for lower-triangular `L`.
fn backward_solve_multi(l: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let n = l.nrows();
    let m = b.ncols();
    let mut x = b.clone();
    for col in 0..m {
        for i in (0..n).rev() {
            let mut sum = x[[i, col]];
            for k in (i + 1)..n {
                sum -= l[[k, i]] * x[[k, col]];
            }
            x[[i, col]] = sum / l[[i, i]];
        }
    }
    x
}

/// Generalized eigenpairs of the pencil `(A, M)`: `A phi = lambda^2 M phi`
/// with `Phi^T M Phi = I` and eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct GenEigBasis {
    /// The `lambda_k^2`, ascending.
    pub eigenvalues: Array1<f64>,
    /// M-orthonormal eigenvector columns.
    pub vectors: Array2<f64>,
}

/// Generalized symmetric eigendecomposition at the default desk-scale cap.
pub fn gen_eig(a: &SparseSymMatrix, m: &SparseSymMatrix) -> Result<GenEigBasis, LinalgError> {
    gen_eig_with_cap(a, m, TRUTH_CAP)
}

pub fn gen_eig_with_cap(
    a: &SparseSymMatrix,
    m: &SparseSymMatrix,
    cap: usize,
) -> Result<GenEigBasis, LinalgError> {
    if a.dim() != m.dim() {
        return Err(LinalgError::DimensionMismatch(a.dim(), m.dim()));
    }
    if a.dim() > cap {
        return Err(LinalgError::TruthScale { n: a.dim(), cap });
    }
    gen_eig_dense(&a.to_dense(), &m.to_dense())
}

/// Dense path: Cholesky-reduce `M = R R^T`, diagonalize `R^{-1} A R^{-T}`,
/// back-transform the eigenvectors.
pub fn gen_eig_dense(a: &DenseMatrix, m: &DenseMatrix) -> Result<GenEigBasis, LinalgError> {
    let r = dense_cholesky(m)?;
    // C = R^{-1} A R^{-T}: forward-solve against A, then against the transpose.
    let y = forward_solve_multi(&r, a);
    let c_raw = forward_solve_multi(&r, &y.t().to_owned());
    let mut c = c_raw.t().to_owned();
    let n = c.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (c[[i, j]] + c[[j, i]]);
            c[[i, j]] = v;
            c[[j, i]] = v;
        }
    }
    let eig = dense_sym_eig(&c)?;
    let vectors = backward_solve_multi(&r, &eig.eigenvectors);
    Ok(GenEigBasis {
        eigenvalues: eig.eigenvalues,
        vectors,
    })
}
