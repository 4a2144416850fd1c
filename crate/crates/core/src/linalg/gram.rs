//! Gram-Schmidt orthonormalization in the `<., .>_M` inner product, with
//! lucky-breakdown detection via a drop tolerance.

use ndarray::{Array1, Array2};

use super::LinalgError;
use crate::sparse::SparseSymMatrix;
use crate::DofVector;

/// Result of an M-orthonormalization pass.
#[derive(Debug, Clone)]
pub struct MgsResult {
    /// M-orthonormal columns spanning the kept input vectors.
    pub basis: Array2<f64>,
    /// Indices (into the input list) of vectors dropped as linearly
    /// dependent — the lucky-breakdown report.
    pub dropped: Vec<usize>,
}

impl MgsResult {
    pub fn kept(&self) -> usize {
        self.basis.ncols()
    }
}

/// Orthonormalizes `vectors` chronologically with respect to `<., .>_M`.
///
/// One full reorthogonalization pass always runs (classical twice-is-enough).
/// A vector whose M-norm after orthogonalization falls below
/// `drop_tol * (its original M-norm)` is dropped and reported. The first
/// vector is only normalized, so a snapshot list starting with `f` yields a
/// basis whose first column is `f / ||f||_M`.
pub fn m_gram_schmidt(
    vectors: &[DofVector],
    m: &SparseSymMatrix,
    drop_tol: f64,
) -> Result<MgsResult, LinalgError> {
    if vectors.is_empty() {
        return Err(LinalgError::EmptyBasis);
    }
    let n = m.dim();
    let mut kept: Vec<Array1<f64>> = Vec::with_capacity(vectors.len());
    let mut dropped = Vec::new();
    for (idx, v) in vectors.iter().enumerate() {
        if v.len() != n {
            return Err(LinalgError::DimensionMismatch(v.len(), n));
        }
        let orig_norm = m.quadratic_form(&v.view()).max(0.0).sqrt();
        if orig_norm == 0.0 {
            dropped.push(idx);
            continue;
        }
        let mut w = v.clone();
        for _pass in 0..2 {
            let mw = m.matvec(&w.view());
            for q in &kept {
                let coeff = q.dot(&mw);
                w = &w - &(coeff * q);
            }
        }
        let norm = m.quadratic_form(&w.view()).max(0.0).sqrt();
        if norm <= drop_tol * orig_norm {
            dropped.push(idx);
        } else {
            kept.push(w / norm);
        }
    }
    if kept.is_empty() {
        return Err(LinalgError::EmptyBasis);
    }
    let mut basis = Array2::zeros((n, kept.len()));
    for (j, q) in kept.iter().enumerate() {
        basis.column_mut(j).assign(q);
    }
    Ok(MgsResult { basis, dropped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::test_support::interval_p1;
    use crate::linalg::{gen_eig, shifted_solve, SolveOptions};
    use crate::rng::SplitMix64;

    const DROP_TOL: f64 = 1e-10;

    fn check_m_orthonormal(basis: &Array2<f64>, m: &SparseSymMatrix) {
        let md = m.to_dense();
        let gram = basis.t().dot(&md).dot(basis);
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (gram[[i, j]] - expect).abs() <= 1e-10,
                    "gram[{i},{j}] = {}",
                    gram[[i, j]]
                );
            }
        }
    }

    #[test]
    fn orthonormal_input_passes_through() {
        let (m, a) = interval_p1(8);
        let basis = gen_eig(&a, &m).unwrap();
        let vectors: Vec<Array1<f64>> = (0..4).map(|j| basis.vectors.column(j).to_owned()).collect();
        let out = m_gram_schmidt(&vectors, &m, DROP_TOL).unwrap();
        assert!(out.dropped.is_empty());
        assert_eq!(out.kept(), 4);
        for (j, v) in vectors.iter().enumerate() {
            let col = out.basis.column(j);
            // Same direction up to sign.
            let dot = col.dot(&m.matvec(&v.view()));
            assert!((dot.abs() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn duplicate_vector_is_dropped() {
        let (m, _) = interval_p1(8);
        let mut rng = SplitMix64::new(2);
        let v: Array1<f64> = (0..7).map(|_| rng.uniform_pm1()).collect();
        let out = m_gram_schmidt(&[v.clone(), v.clone()], &m, DROP_TOL).unwrap();
        assert_eq!(out.kept(), 1);
        assert_eq!(out.dropped, vec![1]);
    }

    #[test]
    fn single_mode_snapshots_collapse_to_one_column() {
        // Snapshots of f = phi_1 at distinct shifts are all parallel to phi_1,
        // so the basis has size 1: the lucky breakdown.
        let (m, a) = interval_p1(8);
        let basis = gen_eig(&a, &m).unwrap();
        let phi1 = basis.vectors.column(0).to_owned();
        let opts = SolveOptions::default();
        let mut snaps = vec![phi1.clone()];
        for &t in &[0.5, 1.5, 4.0] {
            snaps.push(shifted_solve(&m, &a, t, &phi1, &opts).unwrap());
        }
        let out = m_gram_schmidt(&snaps, &m, DROP_TOL).unwrap();
        assert_eq!(out.kept(), 1);
        assert_eq!(out.dropped, vec![1, 2, 3]);
        check_m_orthonormal(&out.basis, &m);
    }

    #[test]
    fn first_column_is_normalized_first_vector() {
        let (m, _) = interval_p1(10);
        let mut rng = SplitMix64::new(9);
        let f: Array1<f64> = (0..9).map(|_| rng.uniform_pm1()).collect();
        let g: Array1<f64> = (0..9).map(|_| rng.uniform_pm1()).collect();
        let out = m_gram_schmidt(&[f.clone(), g], &m, DROP_TOL).unwrap();
        let beta = m.quadratic_form(&f.view()).sqrt();
        let expected = &f / beta;
        for (x, y) in out.basis.column(0).iter().zip(expected.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn random_vectors_yield_m_orthonormal_basis() {
        let (m, _) = interval_p1(16);
        let mut rng = SplitMix64::new(31);
        let vectors: Vec<Array1<f64>> = (0..6)
            .map(|_| (0..15).map(|_| rng.uniform_pm1()).collect())
            .collect();
        let out = m_gram_schmidt(&vectors, &m, DROP_TOL).unwrap();
        assert_eq!(out.kept(), 6);
        check_m_orthonormal(&out.basis, &m);
    }

    #[test]
    fn all_dropped_is_an_error() {
        let (m, _) = interval_p1(6);
        let zeros = Array1::zeros(5);
        assert!(matches!(
            m_gram_schmidt(&[zeros.clone(), zeros], &m, DROP_TOL),
            Err(LinalgError::EmptyBasis)
        ));
        assert!(matches!(
            m_gram_schmidt(&[], &m, DROP_TOL),
            Err(LinalgError::EmptyBasis)
        ));
    }
}
