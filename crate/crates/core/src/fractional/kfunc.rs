//! K-functional values and interpolation norms by quadrature.
//!
//! The K-functional of the discrete pair is evaluated in the rearranged form
//! `K^2(t; f) = t^2 f^T M (M + t^2 A)^{-1} A f`, which is algebraically equal
//! to `||f||_0^2 - <f, v(t)>_0` but free of the catastrophic cancellation the
//! difference form suffers for small `t`.

use std::f64::consts::PI;

use super::{check_s_open_unit, estimate_spectral_bounds, FractionalError};
use crate::linalg::{sparse_solve_spd, LinalgError, SolveOptions};
use crate::sparse::SparseSymMatrix;
use crate::DofVector;

/// Result of a quadrature-based norm evaluation.
#[derive(Debug, Clone, Copy)]
pub struct KNormOutcome {
    pub value: f64,
    /// False when the truncation bounds or the step-halving did not certify
    /// the requested tolerance; the value is then only approximate.
    pub tail_bounded: bool,
    /// Number of integrand evaluations spent.
    pub nodes: usize,
}

/// `K^2(t; f) = ||f||_0^2 - <f, v(t)>_0` for the shifted minimizer `v(t)`.
pub fn k_functional_value(
    m: &SparseSymMatrix,
    a: &SparseSymMatrix,
    f: &DofVector,
    t: f64,
    opts: &SolveOptions,
) -> Result<f64, FractionalError> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(FractionalError::InvalidShift(t));
    }
    let af = a.matvec(&f.view());
    let shifted = SparseSymMatrix::linear_combination(1.0, m, t * t, a).map_err(LinalgError::from)?;
    let w = sparse_solve_spd(&shifted, &af, opts)?;
    let value = t * t * m.matvec(&f.view()).dot(&w);
    let scale = m.quadratic_form(&f.view());
    if value < -1e-12 * scale {
        return Err(FractionalError::NumericalConsistency(value));
    }
    Ok(value.max(0.0))
}

/// `||f||_{H^s} = C_s sqrt(int_0^inf t^{-2s-1} K^2(t; f) dt)` with
/// `C_s^2 = 2 sin(pi s) / pi`, evaluated by composite-Simpson quadrature in
/// `y = ln t` with spectral-interval tail truncation.
pub fn k_norm_by_quadrature(
    m: &SparseSymMatrix,
    a: &SparseSymMatrix,
    f: &DofVector,
    s: f64,
    rel_tol: f64,
    opts: &SolveOptions,
) -> Result<KNormOutcome, FractionalError> {
    check_s_open_unit(s)?;
    check_tol(rel_tol)?;
    let f_norm_sq = m.quadratic_form(&f.view());
    if f_norm_sq == 0.0 {
        return Ok(KNormOutcome {
            value: 0.0,
            tail_bounded: true,
            nodes: 0,
        });
    }
    let interval = estimate_spectral_bounds(m, a, 1.1)?;
    let (lam_lo, lam_hi) = (interval.lambda_lo_sq(), interval.lambda_hi_sq());
    // Lower bound of the exact integral, from lambda >= lambda_L:
    // int = pi/(2 sin pi s) sum lambda_k^{2s} c_k^2 >= that of the bottom mode.
    let base = PI / (2.0 * (PI * s).sin()) * lam_lo.powf(s) * f_norm_sq;
    // Tails: int_0^t0 <= ||f||^2 lam_U t0^{2-2s} / (2-2s),
    //        int_t1^inf <= ||f||^2 t1^{-2s} / (2s).
    let t_lo = (rel_tol * (2.0 - 2.0 * s) * base / (lam_hi * f_norm_sq)).powf(1.0 / (2.0 - 2.0 * s));
    let t_hi = (rel_tol * 2.0 * s * base / f_norm_sq).powf(-1.0 / (2.0 * s));

    let af = a.matvec(&f.view());
    let mf = m.matvec(&f.view());
    let integrand = |y: f64| -> Result<f64, FractionalError> {
        let t = y.exp();
        let shifted =
            SparseSymMatrix::linear_combination(1.0, m, t * t, a).map_err(LinalgError::from)?;
        let w = sparse_solve_spd(&shifted, &af, opts)?;
        Ok((-2.0 * s * y).exp() * t * t * mf.dot(&w))
    };
    let quad = simpson_with_halving(&integrand, t_lo.ln(), t_hi.ln(), 0.1 * rel_tol)?;
    let c_s_sq = 2.0 * (PI * s).sin() / PI;
    Ok(KNormOutcome {
        value: (c_s_sq * quad.value).sqrt(),
        tail_bounded: quad.converged,
        nodes: quad.nodes,
    })
}

/// Dual counterpart: `||F||_{H^{-s}} = C_{1-s} sqrt(int t^{-2(1-s)-1}
/// K_dual^2(t; F) dt)` with the dual K-functional
/// `K_dual^2(t; F) = t^2 (A^{-1} M f)^T M (M + t^2 A)^{-1} A f`.
pub fn dual_k_norm_by_quadrature(
    m: &SparseSymMatrix,
    a: &SparseSymMatrix,
    f: &DofVector,
    s: f64,
    rel_tol: f64,
    opts: &SolveOptions,
) -> Result<KNormOutcome, FractionalError> {
    check_s_open_unit(s)?;
    check_tol(rel_tol)?;
    let sigma = 1.0 - s;
    let f_norm_sq = m.quadratic_form(&f.view());
    if f_norm_sq == 0.0 {
        return Ok(KNormOutcome {
            value: 0.0,
            tail_bounded: true,
            nodes: 0,
        });
    }
    let mf = m.matvec(&f.view());
    // Riesz lift w0 = A^{-1} M f; ||F||_{-1}^2 = <w0, M f>.
    let w0 = sparse_solve_spd(a, &mf, opts)?;
    let m_w0 = m.matvec(&w0.view());
    let norm_m1_sq = w0.dot(&mf);

    let interval = estimate_spectral_bounds(m, a, 1.1)?;
    let (lam_lo, lam_hi) = (interval.lambda_lo_sq(), interval.lambda_hi_sq());
    let base = PI / (2.0 * (PI * sigma).sin()) * lam_lo.powf(sigma) * norm_m1_sq;
    let t_lo = (rel_tol * (2.0 - 2.0 * sigma) * base / (lam_hi * norm_m1_sq))
        .powf(1.0 / (2.0 - 2.0 * sigma));
    let t_hi = (rel_tol * 2.0 * sigma * base / norm_m1_sq).powf(-1.0 / (2.0 * sigma));

    let af = a.matvec(&f.view());
    let integrand = |y: f64| -> Result<f64, FractionalError> {
        let t = y.exp();
        let shifted =
            SparseSymMatrix::linear_combination(1.0, m, t * t, a).map_err(LinalgError::from)?;
        let w = sparse_solve_spd(&shifted, &af, opts)?;
        Ok((-2.0 * sigma * y).exp() * t * t * m_w0.dot(&w))
    };
    let quad = simpson_with_halving(&integrand, t_lo.ln(), t_hi.ln(), 0.1 * rel_tol)?;
    let c_sq = 2.0 * (PI * sigma).sin() / PI;
    Ok(KNormOutcome {
        value: (c_sq * quad.value).sqrt(),
        tail_bounded: quad.converged,
        nodes: quad.nodes,
    })
}

fn check_tol(rel_tol: f64) -> Result<(), FractionalError> {
    if rel_tol > 0.0 && rel_tol <= 0.1 {
        Ok(())
    } else {
        Err(FractionalError::InvalidTolerance(rel_tol))
    }
}

struct QuadResult {
    value: f64,
    converged: bool,
    nodes: usize,
}

/// Composite trapezoid with incremental halving and Simpson (Richardson)
/// extrapolation; stops when successive Simpson values agree to `rel_tol`.
fn simpson_with_halving(
    g: &dyn Fn(f64) -> Result<f64, FractionalError>,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<QuadResult, FractionalError> {
    const N0: usize = 64;
    const N_MAX: usize = 1 << 17;
    let h0 = (b - a) / N0 as f64;
    let mut nodes = 0usize;
    let mut sum = 0.5 * (g(a)? + g(b)?);
    for i in 1..N0 {
        sum += g(a + i as f64 * h0)?;
    }
    nodes += N0 + 1;
    let mut n = N0;
    let mut h = h0;
    let mut trapezoid = sum * h;
    let mut simpson_prev = f64::NAN;
    loop {
        // Refine: midpoints of the current grid.
        let mut mid_sum = 0.0;
        for i in 0..n {
            mid_sum += g(a + (i as f64 + 0.5) * h)?;
        }
        nodes += n;
        let trapezoid_fine = 0.5 * trapezoid + 0.5 * h * mid_sum;
        let simpson = (4.0 * trapezoid_fine - trapezoid) / 3.0;
        n *= 2;
        h *= 0.5;
        trapezoid = trapezoid_fine;
        if !simpson_prev.is_nan() && (simpson - simpson_prev).abs() <= rel_tol * simpson.abs() {
            return Ok(QuadResult {
                value: simpson,
                converged: true,
                nodes,
            });
        }
        if n >= N_MAX {
            return Ok(QuadResult {
                value: simpson,
                converged: false,
                nodes,
            });
        }
        simpson_prev = simpson;
    }
}
