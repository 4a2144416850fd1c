//! Solvers for fractional elliptic problems `L^s u = f` built on two reduced
//! basis algorithms with analytically placed Zolotarev snapshot points.
//!
//! The crate is organized bottom-up:
//!
//! * [`elliptic`] — complete elliptic integrals, the Jacobi `dn` function,
//!   Zolotarev points and the decay-rate constant `C*`.
//! * [`sparse`] — symmetric sparse matrices (lower-triangle CSR) and an
//!   envelope Cholesky factorization.
//! * [`linalg`] — conjugate gradients, shifted solves, a cyclic Jacobi
//!   eigensolver, generalized eigendecompositions, SPD fractional powers and
//!   Gram-Schmidt in the mass inner product.
//! * [`fem`] — structured meshes on the interval, unit square and L-shape,
//!   with P1/P2 assembly of mass and stiffness matrices.
//! * [`fractional`] — the truth solver (discrete eigenfunction method),
//!   interpolation-norm machinery, and the dual / extrapolation reduced basis
//!   algorithms.

pub mod elliptic;
pub mod fem;
pub mod fractional;
pub mod linalg;
pub mod rng;
pub mod sparse;

use ndarray::{Array1, Array2};

/// Coefficient vector over the free (interior) degrees of freedom.
pub type DofVector = Array1<f64>;
/// Dense matrix used for reduced and desk-scale dense operations.
pub type DenseMatrix = Array2<f64>;
