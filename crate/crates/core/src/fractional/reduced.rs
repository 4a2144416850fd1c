//! Zolotarev reduced basis spaces and the two algorithms evaluated on them:
//! the dual approximation (projects `A^{-1}`, then takes the power) and the
//! extrapolation approximation (projects `A`, then takes the negative power).
//!
//! A built [`ReducedSpace`] is immutable and entirely independent of the
//! fractional order: the projected matrices are diagonalized once at build
//! time, so every later `s`-query costs a handful of scalar powers plus one
//! small matrix-vector product (the offline-online split).

use ndarray::{Array1, Array2};
use rayon::prelude::*;

use super::{check_s_open_unit, FractionalError, SpectralInterval};
use crate::elliptic::transformed_zolotarev;
use crate::linalg::{
    cg_solve, dense_sym_eig, m_gram_schmidt, shifted_solve, DenseSymEig, LinalgError, SolveMethod,
    SolveOptions,
};
use crate::sparse::{EnvelopeCholesky, SparseSymMatrix};
use crate::DofVector;

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    pub solve: SolveOptions,
    /// Lucky-breakdown threshold for the Gram-Schmidt pass.
    pub drop_tol: f64,
    /// Run the snapshot solves concurrently.
    pub parallel: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            solve: SolveOptions::default(),
            drop_tol: 1e-10,
            parallel: false,
        }
    }
}

/// A Zolotarev snapshot space with both projected matrices and their cached
/// eigendecompositions.
#[derive(Debug, Clone)]
pub struct ReducedSpace {
    t_params: Vec<f64>,
    interval: SpectralInterval,
    basis: Array2<f64>,
    mv: Array2<f64>,
    a_r: Array2<f64>,
    a_star_r: Array2<f64>,
    beta: f64,
    dropped: Vec<usize>,
    ext_eig: DenseSymEig,
    ext_w: Array2<f64>,
    ext_g: Array1<f64>,
    star_eig: DenseSymEig,
    star_w: Array2<f64>,
    star_g: Array1<f64>,
}

/// Builds the reduced space for load `f` with `r + 1` snapshots: `t_0 = 0`
/// and `t_j = sqrt(Z_j)` for the transformed Zolotarev points `Z_j` on
/// `[lambda_U^{-2}, lambda_L^{-2}]`.
pub fn build_reduced_space(
    m: &SparseSymMatrix,
    a: &SparseSymMatrix,
    f: &DofVector,
    r: usize,
    interval: &SpectralInterval,
    opts: &BuildOptions,
) -> Result<ReducedSpace, FractionalError> {
    if m.dim() != a.dim() || m.dim() != f.len() {
        return Err(FractionalError::DimensionMismatch(m.dim(), f.len()));
    }
    let beta_sq = m.quadratic_form(&f.view());
    if beta_sq <= 0.0 {
        return Err(FractionalError::ZeroLoad);
    }
    let beta = beta_sq.sqrt();

    let mut t_params = vec![0.0f64];
    if r >= 1 {
        let points = transformed_zolotarev(
            1.0 / interval.lambda_hi_sq(),
            1.0 / interval.lambda_lo_sq(),
            r,
        )?;
        t_params.extend(points.points().iter().map(|z| z.sqrt()));
    }

    let snapshots: Vec<DofVector> = if opts.parallel {
        let results: Result<Vec<_>, LinalgError> = t_params
            .par_iter()
            .map(|&t| shifted_solve(m, a, t, f, &opts.solve))
            .collect();
        results?
    } else {
        let results: Result<Vec<_>, LinalgError> = t_params
            .iter()
            .map(|&t| shifted_solve(m, a, t, f, &opts.solve))
            .collect();
        results?
    };

    let mgs = m_gram_schmidt(&snapshots, m, opts.drop_tol)?;
    let basis = mgs.basis;
    let k = basis.ncols();
    let n = basis.nrows();

    let mut mv = Array2::zeros((n, k));
    let mut av = Array2::zeros((n, k));
    for j in 0..k {
        let col = basis.column(j);
        mv.column_mut(j).assign(&m.matvec(&col));
        av.column_mut(j).assign(&a.matvec(&col));
    }
    let a_r = symmetrized_projection(&basis.t().dot(&av))?;
    let p_dual = solve_columns(a, &mv, &opts.solve)?;
    let a_star_r = symmetrized_projection(&mv.t().dot(&p_dual))?;

    let ext_eig = dense_sym_eig(&a_r)?;
    let star_eig = dense_sym_eig(&a_star_r)?;
    for eig in [&ext_eig, &star_eig] {
        if eig.eigenvalues[0] <= 0.0 {
            return Err(FractionalError::ProjectedNotSpd(eig.eigenvalues[0]));
        }
    }

    // f in reduced coordinates is beta * e_1 by construction of the basis.
    let ext_g: Array1<f64> = ext_eig.eigenvectors.row(0).mapv(|v| beta * v);
    let star_g: Array1<f64> = star_eig.eigenvectors.row(0).mapv(|v| beta * v);
    let ext_w = basis.dot(&ext_eig.eigenvectors);
    let star_w = p_dual.dot(&star_eig.eigenvectors);

    Ok(ReducedSpace {
        t_params,
        interval: *interval,
        basis,
        mv,
        a_r,
        a_star_r,
        beta,
        dropped: mgs.dropped,
        ext_eig,
        ext_w,
        ext_g,
        star_eig,
        star_w,
        star_g,
    })
}

/// `A^{-1} B` column-wise, honoring the configured solve method.
fn solve_columns(
    a: &SparseSymMatrix,
    b: &Array2<f64>,
    opts: &SolveOptions,
) -> Result<Array2<f64>, FractionalError> {
    let (n, k) = b.dim();
    let mut out = Array2::zeros((n, k));
    match opts.method {
        SolveMethod::ConjugateGradient => {
            for j in 0..k {
                let rhs = b.column(j).to_owned();
                let (x, _) = cg_solve(a, &rhs, opts.rel_tol, 10 * n)?;
                out.column_mut(j).assign(&x);
            }
        }
        // One factorization amortized over all columns.
        _ => {
            let chol = EnvelopeCholesky::factor(a).map_err(LinalgError::from)?;
            for j in 0..k {
                out.column_mut(j).assign(&chol.solve(&b.column(j)));
            }
        }
    }
    Ok(out)
}

fn symmetrized_projection(raw: &Array2<f64>) -> Result<Array2<f64>, FractionalError> {
    let k = raw.nrows();
    let scale = raw.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1e-300);
    let mut sym = raw.clone();
    let mut max_asym = 0.0f64;
    for i in 0..k {
        for j in 0..i {
            max_asym = max_asym.max((raw[[i, j]] - raw[[j, i]]).abs());
            let v = 0.5 * (raw[[i, j]] + raw[[j, i]]);
            sym[[i, j]] = v;
            sym[[j, i]] = v;
        }
    }
    if max_asym > 1e-12 * scale {
        return Err(FractionalError::ProjectedAsymmetric(max_asym));
    }
    Ok(sym)
}

/// `W c` for a tall, narrow, row-major `W`: the hot loop of every online
/// query, kept free of general matmul dispatch overhead.
fn narrow_matvec(w: &Array2<f64>, c: &Array1<f64>) -> Array1<f64> {
    let (n, k) = w.dim();
    let cs = c.as_slice().expect("contiguous coefficients");
    let mut out = Array1::zeros(n);
    if let Some(ws) = w.as_slice() {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &ws[i * k..(i + 1) * k];
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(cs) {
                acc += a * b;
            }
            *o = acc;
        }
    } else {
        for (i, o) in out.iter_mut().enumerate() {
            *o = w.row(i).dot(c);
        }
    }
    out
}

impl ReducedSpace {
    /// Snapshot parameters, `t_0 = 0` first.
    pub fn t_params(&self) -> &[f64] {
        &self.t_params
    }

    pub fn interval(&self) -> &SpectralInterval {
        &self.interval
    }

    /// The M-orthonormal basis matrix `V_r` (columns may be fewer than
    /// `r + 1` after lucky breakdowns).
    pub fn basis(&self) -> &Array2<f64> {
        &self.basis
    }

    /// Dimension of the reduced space after drops.
    pub fn effective_dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Snapshot indices dropped by Gram-Schmidt (lucky breakdown report).
    pub fn dropped(&self) -> &[usize] {
        &self.dropped
    }

    /// `beta = ||f||_0` of the build load.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Projected stiffness `A_r = V_r^T A V_r`.
    pub fn a_r(&self) -> &Array2<f64> {
        &self.a_r
    }

    /// Projected dual matrix `A_{*,r} = V_r^T M A^{-1} M V_r`.
    pub fn a_star_r(&self) -> &Array2<f64> {
        &self.a_star_r
    }

    /// Reduced coordinates `V_r^T M g` of an arbitrary dof vector.
    pub fn reduced_coords(&self, g: &DofVector) -> Array1<f64> {
        self.mv.t().dot(g)
    }

    pub(crate) fn dual_norm_unchecked(&self, s: f64) -> f64 {
        self.star_eig
            .eigenvalues
            .iter()
            .zip(self.star_g.iter())
            .map(|(&lam, &g)| lam.powf(s) * g * g)
            .sum::<f64>()
            .sqrt()
    }

    /// Dual reduced basis norm `||f_r||_{A_{*,r}^s}`.
    pub fn dual_norm(&self, s: f64) -> Result<f64, FractionalError> {
        check_s_open_unit(s)?;
        Ok(self.dual_norm_unchecked(s))
    }

    pub(crate) fn extrap_norm_unchecked(&self, s: f64) -> f64 {
        self.ext_eig
            .eigenvalues
            .iter()
            .zip(self.ext_g.iter())
            .map(|(&lam, &g)| lam.powf(-s) * g * g)
            .sum::<f64>()
            .sqrt()
    }

    /// Extrapolation norm `sqrt(f_r^T A_r^{-s} f_r)`.
    pub fn extrap_norm(&self, s: f64) -> Result<f64, FractionalError> {
        check_s_open_unit(s)?;
        Ok(self.extrap_norm_unchecked(s))
    }

    pub(crate) fn dual_solve_unchecked(&self, s: f64) -> DofVector {
        let coeffs: Array1<f64> = self
            .star_eig
            .eigenvalues
            .iter()
            .zip(self.star_g.iter())
            .map(|(&lam, &g)| lam.powf(s - 1.0) * g)
            .collect();
        narrow_matvec(&self.star_w, &coeffs)
    }

    /// Dual reduced basis solution `u_r^*(s) = A^{-1} M V_r A_{*,r}^{s-1} f_r`.
    pub fn dual_solve(&self, s: f64) -> Result<DofVector, FractionalError> {
        check_s_open_unit(s)?;
        Ok(self.dual_solve_unchecked(s))
    }

    pub(crate) fn extrap_solve_unchecked(&self, s: f64) -> DofVector {
        let coeffs: Array1<f64> = self
            .ext_eig
            .eigenvalues
            .iter()
            .zip(self.ext_g.iter())
            .map(|(&lam, &g)| lam.powf(-s) * g)
            .collect();
        narrow_matvec(&self.ext_w, &coeffs)
    }

    /// Extrapolation solution `u_r(s) = V_r A_r^{-s} V_r^T M f`.
    pub fn extrap_solve(&self, s: f64) -> Result<DofVector, FractionalError> {
        check_s_open_unit(s)?;
        Ok(self.extrap_solve_unchecked(s))
    }

    /// Dual norm of an arbitrary load through this space.
    pub fn dual_norm_for(&self, g: &DofVector, s: f64) -> Result<f64, FractionalError> {
        check_s_open_unit(s)?;
        let c = self.star_eig.eigenvectors.t().dot(&self.reduced_coords(g));
        Ok(self
            .star_eig
            .eigenvalues
            .iter()
            .zip(c.iter())
            .map(|(&lam, &ci)| lam.powf(s) * ci * ci)
            .sum::<f64>()
            .sqrt())
    }

    /// Dual solution operator applied to an arbitrary load.
    pub fn dual_solve_for(&self, g: &DofVector, s: f64) -> Result<DofVector, FractionalError> {
        check_s_open_unit(s)?;
        let c = self.star_eig.eigenvectors.t().dot(&self.reduced_coords(g));
        let coeffs: Array1<f64> = self
            .star_eig
            .eigenvalues
            .iter()
            .zip(c.iter())
            .map(|(&lam, &ci)| lam.powf(s - 1.0) * ci)
            .collect();
        Ok(self.star_w.dot(&coeffs))
    }

    /// Extrapolation solution operator applied to an arbitrary load.
    pub fn extrap_solve_for(&self, g: &DofVector, s: f64) -> Result<DofVector, FractionalError> {
        check_s_open_unit(s)?;
        let c = self.ext_eig.eigenvectors.t().dot(&self.reduced_coords(g));
        let coeffs: Array1<f64> = self
            .ext_eig
            .eigenvalues
            .iter()
            .zip(c.iter())
            .map(|(&lam, &ci)| lam.powf(-s) * ci)
            .collect();
        Ok(self.ext_w.dot(&coeffs))
    }
}
