//! The truth solver (discrete eigenfunction method), interpolation-norm
//! machinery as executable identities, spectral-bound estimation, and the two
//! reduced basis algorithms with Zolotarev snapshot parameters.

mod bounds;
mod kfunc;
mod reduced;
mod truth;

pub use bounds::{estimate_spectral_bounds, SpectralInterval};
pub use kfunc::{
    dual_k_norm_by_quadrature, k_functional_value, k_norm_by_quadrature, KNormOutcome,
};
pub use reduced::{build_reduced_space, BuildOptions, ReducedSpace};
pub use truth::{truth_dual_norm, truth_solve, TruthBasis};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FractionalError {
    #[error("fractional order s must lie in (0, 1), got {0}")]
    SOutOfRange(f64),
    #[error("load vector is zero; reduced space would be empty")]
    ZeroLoad,
    #[error("spectral interval requires 0 < lambda_L^2 < lambda_U^2, got [{0}, {1}]")]
    InvalidInterval(f64, f64),
    #[error("safety factor must be >= 1, got {0}")]
    InvalidSafety(f64),
    #[error("tolerance must lie in (0, 0.1], got {0}")]
    InvalidTolerance(f64),
    #[error("shift parameter must be positive, got {0}")]
    InvalidShift(f64),
    #[error("K-functional came out negative beyond roundoff: {0:.3e}")]
    NumericalConsistency(f64),
    #[error("projected matrix is asymmetric beyond 1e-12 (max deviation {0:.3e})")]
    ProjectedAsymmetric(f64),
    #[error("projected matrix is not positive definite (eigenvalue {0:.3e})")]
    ProjectedNotSpd(f64),
    #[error("extremal eigenvalue estimation did not converge in {0} iterations")]
    EstimationFailure(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error(transparent)]
    Elliptic(#[from] crate::elliptic::EllipticError),
    #[error(transparent)]
    Linalg(#[from] crate::linalg::LinalgError),
}

pub(crate) fn check_s_open_unit(s: f64) -> Result<(), FractionalError> {
    if s > 0.0 && s < 1.0 && s.is_finite() {
        Ok(())
    } else {
        Err(FractionalError::SOutOfRange(s))
    }
}
