//! Symmetric sparse matrices stored as the lower triangle in compressed-row
//! form, with an envelope Cholesky factorization for the direct solver path.
//!
//! Only the entries with `row >= col` are stored; symmetry therefore holds
//! exactly by construction and cannot be lost to assembly roundoff.

use ndarray::{Array1, Array2, ArrayView1};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SparseError {
    #[error("matrix dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("index ({0}, {1}) out of bounds for dimension {2}")]
    IndexOutOfBounds(usize, usize, usize),
    #[error("input matrix is not symmetric: |B - B^T| reaches {0:.3e}")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite (pivot {0} at row {1})")]
    NotPositiveDefinite(f64, usize),
    #[error("row {0} has no diagonal entry")]
    MissingDiagonal(usize),
}

/// Symmetric sparse matrix; lower triangle in CSR, implicit upper triangle.
#[derive(Debug, Clone)]
pub struct SparseSymMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Accumulates (possibly duplicate) triplets and compresses them into a
/// [`SparseSymMatrix`]. Entries above the diagonal are mirrored below.
#[derive(Debug)]
pub struct SymCooBuilder {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SymCooBuilder {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: Vec::new(),
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        if i >= j {
            self.entries.push((i, j, v));
        } else {
            self.entries.push((j, i, v));
        }
    }

    pub fn build(mut self) -> SparseSymMatrix {
        self.entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_counts = vec![0usize; self.n];
        let mut col_idx = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut last = None;
        for (i, j, v) in self.entries {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_counts[i] += 1;
                last = Some((i, j));
            }
        }
        let mut row_ptr = vec![0usize; self.n + 1];
        for i in 0..self.n {
            row_ptr[i + 1] = row_ptr[i] + row_counts[i];
        }
        SparseSymMatrix {
            n: self.n,
            row_ptr,
            col_idx,
            values,
        }
    }
}

impl SparseSymMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored (lower-triangle) entries.
    pub fn nnz_lower(&self) -> usize {
        self.values.len()
    }

    /// Identity matrix of dimension `n`.
    pub fn identity(n: usize) -> Self {
        let mut b = SymCooBuilder::new(n);
        for i in 0..n {
            b.add(i, i, 1.0);
        }
        b.build()
    }

    /// Builds from a dense symmetric matrix, dropping exact zeros.
    pub fn from_dense(dense: &Array2<f64>) -> Result<Self, SparseError> {
        let (r, c) = dense.dim();
        if r != c {
            return Err(SparseError::DimensionMismatch(r, c));
        }
        let mut max_asym = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..r {
            for j in 0..i {
                max_asym = max_asym.max((dense[[i, j]] - dense[[j, i]]).abs());
            }
            for j in 0..r {
                scale = scale.max(dense[[i, j]].abs());
            }
        }
        if max_asym > 1e-12 * scale.max(1e-300) {
            return Err(SparseError::NotSymmetric(max_asym));
        }
        let mut b = SymCooBuilder::new(r);
        for i in 0..r {
            for j in 0..=i {
                let v = 0.5 * (dense[[i, j]] + dense[[j, i]]);
                if v != 0.0 || i == j {
                    b.add(i, j, v);
                }
            }
        }
        Ok(b.build())
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.n, self.n));
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                out[[i, j]] = self.values[k];
                out[[j, i]] = self.values[k];
            }
        }
        out
    }

    /// `y = B x`, expanding the implicit upper triangle on the fly.
    pub fn matvec(&self, x: &ArrayView1<f64>) -> Array1<f64> {
        debug_assert_eq!(x.len(), self.n);
        let mut y = Array1::zeros(self.n);
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                let v = self.values[k];
                acc += v * x[j];
                if j != i {
                    y[j] += v * x[i];
                }
            }
            y[i] += acc;
        }
        y
    }

    pub fn diagonal(&self) -> Array1<f64> {
        let mut d = Array1::zeros(self.n);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col_idx[k] == i {
                    d[i] = self.values[k];
                }
            }
        }
        d
    }

    /// `ca * A + cb * B` over the union sparsity pattern.
    pub fn linear_combination(
        ca: f64,
        a: &SparseSymMatrix,
        cb: f64,
        b: &SparseSymMatrix,
    ) -> Result<SparseSymMatrix, SparseError> {
        if a.n != b.n {
            return Err(SparseError::DimensionMismatch(a.n, b.n));
        }
        let mut builder = SymCooBuilder::new(a.n);
        for i in 0..a.n {
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                builder.add(i, a.col_idx[k], ca * a.values[k]);
            }
            for k in b.row_ptr[i]..b.row_ptr[i + 1] {
                builder.add(i, b.col_idx[k], cb * b.values[k]);
            }
        }
        Ok(builder.build())
    }

    /// Quadratic form `x^T B x`.
    pub fn quadratic_form(&self, x: &ArrayView1<f64>) -> f64 {
        self.matvec(x).dot(x)
    }
}

/// Envelope (profile) Cholesky factorization `B = L L^T`.
///
/// Stores, per row, the dense segment from the first structural nonzero to
/// the diagonal. Cholesky fill stays inside the envelope, so this is exact
/// for any SPD matrix; it is economical for the banded matrices produced by
/// the structured meshes in this crate.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    n: usize,
    first: Vec<usize>,
    seg_ptr: Vec<usize>,
    seg: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(b: &SparseSymMatrix) -> Result<Self, SparseError> {
        let n = b.n;
        let mut first = vec![0usize; n];
        for i in 0..n {
            let lo = b.row_ptr[i];
            let hi = b.row_ptr[i + 1];
            if lo == hi || b.col_idx[hi - 1] != i {
                return Err(SparseError::MissingDiagonal(i));
            }
            first[i] = b.col_idx[lo];
        }
        let mut seg_ptr = vec![0usize; n + 1];
        for i in 0..n {
            seg_ptr[i + 1] = seg_ptr[i] + (i - first[i] + 1);
        }
        let mut seg = vec![0.0f64; seg_ptr[n]];
        for i in 0..n {
            for k in b.row_ptr[i]..b.row_ptr[i + 1] {
                let j = b.col_idx[k];
                seg[seg_ptr[i] + (j - first[i])] = b.values[k];
            }
        }
        // Row-oriented factorization within the envelope.
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let mut sum = seg[seg_ptr[i] + (j - fi)];
                for k in lo..j {
                    sum -= seg[seg_ptr[i] + (k - fi)] * seg[seg_ptr[j] + (k - fj)];
                }
                seg[seg_ptr[i] + (j - fi)] = sum / seg[seg_ptr[j] + (j - fj)];
            }
            let mut diag = seg[seg_ptr[i] + (i - fi)];
            for k in fi..i {
                let l = seg[seg_ptr[i] + (k - fi)];
                diag -= l * l;
            }
            if diag <= 0.0 || !diag.is_finite() {
                return Err(SparseError::NotPositiveDefinite(diag, i));
            }
            seg[seg_ptr[i] + (i - fi)] = diag.sqrt();
        }
        Ok(Self {
            n,
            first,
            seg_ptr,
            seg,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `B x = rhs` via forward and backward substitution.
    pub fn solve(&self, rhs: &ArrayView1<f64>) -> Array1<f64> {
        debug_assert_eq!(rhs.len(), self.n);
        let mut x = rhs.to_owned();
        // L y = rhs
        for i in 0..self.n {
            let fi = self.first[i];
            let mut sum = x[i];
            for k in fi..i {
                sum -= self.seg[self.seg_ptr[i] + (k - fi)] * x[k];
            }
            x[i] = sum / self.seg[self.seg_ptr[i] + (i - fi)];
        }
        // L^T x = y
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            x[i] /= self.seg[self.seg_ptr[i] + (i - fi)];
            let xi = x[i];
            for k in fi..i {
                x[k] -= self.seg[self.seg_ptr[i] + (k - fi)] * xi;
            }
        }
        x
    }
}
