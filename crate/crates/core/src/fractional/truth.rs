//! The truth solver: discrete eigenfunction method `u(s) = L^{-s} pi_h f`
//! with `L = M^{-1} A`, evaluated through the generalized eigenbasis.

use ndarray::Array1;

use super::{check_s_open_unit, FractionalError};
use crate::linalg::GenEigBasis;
use crate::sparse::SparseSymMatrix;
use crate::DofVector;

/// A generalized eigenbasis together with the load coefficients
/// `c_k = <f, phi_k>_0`; everything the spectral truth solver needs.
#[derive(Debug, Clone)]
pub struct TruthBasis {
    eig: GenEigBasis,
    load_coeffs: Array1<f64>,
    load_norm_sq: f64,
}

impl TruthBasis {
    pub fn new(
        eig: GenEigBasis,
        m: &SparseSymMatrix,
        f: &DofVector,
    ) -> Result<Self, FractionalError> {
        if eig.vectors.nrows() != f.len() || m.dim() != f.len() {
            return Err(FractionalError::DimensionMismatch(
                eig.vectors.nrows(),
                f.len(),
            ));
        }
        let mf = m.matvec(&f.view());
        let load_coeffs = eig.vectors.t().dot(&mf);
        let load_norm_sq = mf.dot(f);
        Ok(Self {
            eig,
            load_coeffs,
            load_norm_sq,
        })
    }

    /// The generalized eigenvalues `lambda_k^2`, ascending.
    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.eig.eigenvalues
    }

    pub fn eigenvector(&self, k: usize) -> DofVector {
        self.eig.vectors.column(k).to_owned()
    }

    pub fn load_coeffs(&self) -> &Array1<f64> {
        &self.load_coeffs
    }

    /// `||pi_h f||_0^2`; by Parseval this equals the coefficient square sum.
    pub fn load_norm_sq(&self) -> f64 {
        self.load_norm_sq
    }

    /// Number of excited modes: coefficients above `tol * ||f||_0`.
    pub fn excited_modes(&self, tol: f64) -> usize {
        let scale = self.load_norm_sq.sqrt();
        self.load_coeffs
            .iter()
            .filter(|c| c.abs() > tol * scale)
            .count()
    }

    pub(crate) fn solve_unchecked(&self, s: f64) -> DofVector {
        let scaled: Array1<f64> = self
            .load_coeffs
            .iter()
            .zip(self.eig.eigenvalues.iter())
            .map(|(c, &lam_sq)| c * lam_sq.powf(-s))
            .collect();
        self.eig.vectors.dot(&scaled)
    }

    /// `u(s) = sum_k lambda_k^{-2s} c_k phi_k`.
    pub fn solve(&self, s: f64) -> Result<DofVector, FractionalError> {
        check_s_open_unit(s)?;
        Ok(self.solve_unchecked(s))
    }

    /// `||f||_{H^{-s}} = sqrt(sum_k lambda_k^{-2s} c_k^2)`.
    pub fn dual_norm(&self, s: f64) -> Result<f64, FractionalError> {
        check_s_open_unit(s)?;
        Ok(self
            .load_coeffs
            .iter()
            .zip(self.eig.eigenvalues.iter())
            .map(|(c, &lam_sq)| c * c * lam_sq.powf(-s))
            .sum::<f64>()
            .sqrt())
    }
}

/// Free-function form of [`TruthBasis::solve`].
pub fn truth_solve(basis: &TruthBasis, s: f64) -> Result<DofVector, FractionalError> {
    basis.solve(s)
}

/// Free-function form of [`TruthBasis::dual_norm`].
pub fn truth_dual_norm(basis: &TruthBasis, s: f64) -> Result<f64, FractionalError> {
    basis.dual_norm(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble, unit_interval_mesh, FeOrder, FeSpace};
    use crate::linalg::{dense_cholesky, gen_eig, spd_fractional_power};
    use crate::rng::SplitMix64;
    use ndarray::Array2;

    fn interval_truth(n: usize, f: &DofVector) -> (SparseSymMatrix, SparseSymMatrix, TruthBasis) {
        let mesh = unit_interval_mesh(n).unwrap();
        let (m, a) = assemble(&mesh, FeOrder::P1).unwrap();
        let basis = gen_eig(&a, &m).unwrap();
        let truth = TruthBasis::new(basis, &m, f).unwrap();
        (m, a, truth)
    }

    #[test]
    fn parseval_identity() {
        let mut rng = SplitMix64::new(77);
        let f: Array1<f64> = (0..15).map(|_| rng.uniform_pm1()).collect();
        let (_, _, truth) = interval_truth(16, &f);
        let coeff_sq: f64 = truth.load_coeffs().iter().map(|c| c * c).sum();
        assert!((coeff_sq - truth.load_norm_sq()).abs() <= 1e-10 * truth.load_norm_sq());
    }

    #[test]
    fn single_mode_scaling() {
        // f = phi_k: u(s) = lambda_k^{-2s} phi_k.
        let mesh = unit_interval_mesh(12).unwrap();
        let (m, a) = assemble(&mesh, FeOrder::P1).unwrap();
        let basis = gen_eig(&a, &m).unwrap();
        let k = 3;
        let phi = basis.vectors.column(k).to_owned();
        let lam_sq = basis.eigenvalues[k];
        let truth = TruthBasis::new(basis.clone(), &m, &phi).unwrap();
        let s = 0.37;
        let u = truth.solve(s).unwrap();
        for (ui, pi) in u.iter().zip(phi.iter()) {
            assert!((ui - lam_sq.powf(-s) * pi).abs() < 1e-12);
        }
        // Exponent algebra: factors at s and 1-s multiply to lambda_k^{-2}.
        let u1 = truth.solve(1.0 - s).unwrap();
        let ratio = (u.dot(&m.matvec(&phi.view()))) * (u1.dot(&m.matvec(&phi.view())));
        assert!((ratio - lam_sq.powf(-1.0)).abs() < 1e-12);
        // Dual norm of a single mode: lambda_k^{-s} = (lambda_k^2)^{-s/2}.
        assert!((truth.dual_norm(s).unwrap() - lam_sq.powf(-s / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn dual_norm_limit_towards_l2() {
        let mut rng = SplitMix64::new(5);
        let f: Array1<f64> = (0..7).map(|_| rng.uniform_pm1()).collect();
        let (_, _, truth) = interval_truth(8, &f);
        let l2 = truth.load_norm_sq().sqrt();
        let near = truth.dual_norm(1e-6).unwrap();
        assert!((near - l2).abs() / l2 < 1e-4);
    }

    #[test]
    fn dual_norm_squared_is_load_pairing_with_solution() {
        // ||f||_{H^{-s}}^2 = f^T M u(s).
        let mut rng = SplitMix64::new(6);
        let f: Array1<f64> = (0..11).map(|_| rng.uniform_pm1()).collect();
        let (m, _, truth) = interval_truth(12, &f);
        for &s in &[0.2, 0.5, 0.8] {
            let u = truth.solve(s).unwrap();
            let pairing = m.matvec(&f.view()).dot(&u);
            let norm_sq = truth.dual_norm(s).unwrap().powi(2);
            assert!((pairing - norm_sq).abs() <= 1e-10 * norm_sq.max(1.0));
        }
    }

    #[test]
    fn matches_cholesky_transformed_matrix_power() {
        // u(s) = R^{-T} C^{-s} R^T f with M = R R^T, C = R^{-1} A R^{-T}:
        // the dense matrix-function oracle.
        let mesh = unit_interval_mesh(8).unwrap();
        let space = FeSpace::new(&mesh, FeOrder::P1).unwrap();
        let (m, a) = space.assemble().unwrap();
        let f = space
            .l2_project(&|x, _| (std::f64::consts::PI * x).sin())
            .unwrap();
        let basis = gen_eig(&a, &m).unwrap();
        let truth = TruthBasis::new(basis, &m, &f).unwrap();
        let s = 0.5;
        let u = truth.solve(s).unwrap();

        let md = m.to_dense();
        let ad = a.to_dense();
        let r = dense_cholesky(&md).unwrap();
        let n = md.nrows();
        // C = R^{-1} A R^{-T} via two triangular solves.
        let mut c = Array2::zeros((n, n));
        {
            // Y = R^{-1} A
            let mut y = ad.clone();
            for col in 0..n {
                for i in 0..n {
                    let mut sum = y[[i, col]];
                    for k in 0..i {
                        sum -= r[[i, k]] * y[[k, col]];
                    }
                    y[[i, col]] = sum / r[[i, i]];
                }
            }
            // C = (R^{-1} Y^T)^T
            let yt = y.t().to_owned();
            let mut z = yt.clone();
            for col in 0..n {
                for i in 0..n {
                    let mut sum = z[[i, col]];
                    for k in 0..i {
                        sum -= r[[i, k]] * z[[k, col]];
                    }
                    z[[i, col]] = sum / r[[i, i]];
                }
            }
            c.assign(&z.t());
            for i in 0..n {
                for j in 0..i {
                    let v = 0.5 * (c[[i, j]] + c[[j, i]]);
                    c[[i, j]] = v;
                    c[[j, i]] = v;
                }
            }
        }
        let c_pow = spd_fractional_power(&c, -s).unwrap();
        let rt_f = r.t().dot(&f);
        let w = c_pow.dot(&rt_f);
        // u = R^{-T} w by back substitution.
        let mut oracle = w.clone();
        for i in (0..n).rev() {
            let mut sum = oracle[i];
            for k in (i + 1)..n {
                sum -= r[[k, i]] * oracle[k];
            }
            oracle[i] = sum / r[[i, i]];
        }
        for (ui, oi) in u.iter().zip(oracle.iter()) {
            assert!((ui - oi).abs() < 1e-9, "{ui} vs {oi}");
        }
    }

    #[test]
    fn rejects_s_outside_open_unit_interval() {
        let mut rng = SplitMix64::new(1);
        let f: Array1<f64> = (0..7).map(|_| rng.uniform_pm1()).collect();
        let (_, _, truth) = interval_truth(8, &f);
        for bad in [0.0, 1.0, -0.5, 1.5, f64::NAN] {
            assert!(truth.solve(bad).is_err());
            assert!(truth.dual_norm(bad).is_err());
        }
    }

    #[test]
    fn zero_load_maps_to_zero() {
        let f = Array1::zeros(7);
        let (_, _, truth) = interval_truth(8, &f);
        assert_eq!(truth.dual_norm(0.5).unwrap(), 0.0);
        assert!(truth.solve(0.5).unwrap().iter().all(|&v| v == 0.0));
    }
}
