//! Spectral interval enclosing the generalized spectrum of `(A, M)`, with
//! power/inverse iteration estimation of the extremal eigenvalues.

use ndarray::Array1;

use super::FractionalError;
use crate::linalg::LinalgError;
use crate::sparse::{EnvelopeCholesky, SparseSymMatrix};

const RAYLEIGH_TOL: f64 = 1e-6;
const MAX_ITER: usize = 5000;

/// A positive interval `[lambda_L^2, lambda_U^2]` meant to enclose the
/// generalized spectrum of `(A, M)`.
#[derive(Debug, Clone, Copy)]
pub struct SpectralInterval {
    lambda_lo_sq: f64,
    lambda_hi_sq: f64,
}

impl SpectralInterval {
    pub fn new(lambda_lo_sq: f64, lambda_hi_sq: f64) -> Result<Self, FractionalError> {
        if !(lambda_lo_sq > 0.0 && lambda_hi_sq > lambda_lo_sq)
            || !lambda_lo_sq.is_finite()
            || !lambda_hi_sq.is_finite()
        {
            return Err(FractionalError::InvalidInterval(lambda_lo_sq, lambda_hi_sq));
        }
        Ok(Self {
            lambda_lo_sq,
            lambda_hi_sq,
        })
    }

    pub fn lambda_lo_sq(&self) -> f64 {
        self.lambda_lo_sq
    }

    pub fn lambda_hi_sq(&self) -> f64 {
        self.lambda_hi_sq
    }

    /// Estimated condition number `kappa = lambda_U^2 / lambda_L^2`.
    pub fn kappa(&self) -> f64 {
        self.lambda_hi_sq / self.lambda_lo_sq
    }

    /// `delta = lambda_L^2 / lambda_U^2 = 1 / kappa`.
    pub fn delta(&self) -> f64 {
        self.lambda_lo_sq / self.lambda_hi_sq
    }
}

/// Estimates `[lambda_L^2 / safety, lambda_U^2 * safety]` for the pencil
/// `(A, M)` by inverse and forward power iteration on `M^{-1} A`, each run to
/// a relative Rayleigh-quotient change of 1e-6.
pub fn estimate_spectral_bounds(
    m: &SparseSymMatrix,
    a: &SparseSymMatrix,
    safety: f64,
) -> Result<SpectralInterval, FractionalError> {
    if !(safety >= 1.0) || !safety.is_finite() {
        return Err(FractionalError::InvalidSafety(safety));
    }
    if m.dim() != a.dim() {
        return Err(FractionalError::DimensionMismatch(m.dim(), a.dim()));
    }
    let n = m.dim();
    let m_chol = EnvelopeCholesky::factor(m).map_err(LinalgError::from)?;
    let a_chol = EnvelopeCholesky::factor(a).map_err(LinalgError::from)?;

    // Oscillatory start for the top of the spectrum, smooth start for the
    // bottom.
    let alternating: Array1<f64> =
        (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let ones = Array1::ones(n);

    let hi = rayleigh_iterate(m, a, &m_chol, false, alternating)?;
    let lo = rayleigh_iterate(m, a, &a_chol, true, ones)?;
    SpectralInterval::new(lo / safety, hi * safety)
}

/// Power iteration on `M^{-1} A` (forward) or `A^{-1} M` (`inverse = true`),
/// returning the converged Rayleigh quotient `z^T A z / z^T M z`.
fn rayleigh_iterate(
    m: &SparseSymMatrix,
    a: &SparseSymMatrix,
    solver: &EnvelopeCholesky,
    inverse: bool,
    start: Array1<f64>,
) -> Result<f64, FractionalError> {
    let mut z = start;
    let mut rho_prev = f64::NAN;
    for iter in 0..MAX_ITER {
        let az = a.matvec(&z.view());
        let mz = m.matvec(&z.view());
        let rho = az.dot(&z) / mz.dot(&z);
        if iter >= 2 && (rho - rho_prev).abs() <= RAYLEIGH_TOL * rho.abs() {
            return Ok(rho);
        }
        rho_prev = rho;
        let next = if inverse {
            solver.solve(&mz.view())
        } else {
            solver.solve(&az.view())
        };
        let norm = m.quadratic_form(&next.view()).sqrt();
        z = next / norm;
    }
    Err(FractionalError::EstimationFailure(MAX_ITER))
}
