//! Complete elliptic integrals, the Jacobi elliptic function `dn`, Zolotarev
//! points, and the decay-rate constant `C*`.
//!
//! **Convention warning.** Every function here takes the elliptic *modulus*
//! `k`, not the *parameter* `m = k^2` used by several libraries (scipy's
//! `ellipk` among them). Mixing the two conventions is the classic bug with
//! these functions; all call sites in this crate pass the modulus.

use thiserror::Error;

/// Relative agreement of successive arithmetic/geometric means at which the
/// AGM iteration stops.
const AGM_TOL: f64 = 1e-15;
const AGM_MAX_ITER: usize = 64;

#[derive(Debug, Error)]
pub enum EllipticError {
    #[error("elliptic modulus must satisfy 0 <= k < 1, got {0}")]
    InvalidModulus(f64),
    #[error("Zolotarev delta must lie in (0, 1), got {0}")]
    InvalidDelta(f64),
    #[error("point count must be at least 1")]
    EmptyPointSet,
    #[error("interval must satisfy 0 < a < b, got [{0}, {1}]")]
    InvalidInterval(f64, f64),
    #[error("condition number must exceed 1, got {0}")]
    InvalidKappa(f64),
}

/// Elliptic modulus `k` stored together with its complement `k' = sqrt(1 - k^2)`.
///
/// For moduli extremely close to 1 the complement is the quantity that must be
/// stored exactly: `k` itself may round to 1.0 while `k'` carries all the
/// information. [`EllipticModulus::from_complement`] builds such moduli without
/// cancellation; the AGM-based algorithms below only ever consume `k'` and the
/// (harmlessly rounded) `k`.
#[derive(Debug, Clone, Copy)]
pub struct EllipticModulus {
    k: f64,
    k_prime: f64,
}

impl EllipticModulus {
    /// Modulus from `k` itself. Requires `0 <= k < 1`.
    pub fn new(k: f64) -> Result<Self, EllipticError> {
        if !(0.0..1.0).contains(&k) {
            return Err(EllipticError::InvalidModulus(k));
        }
        let k_prime = ((1.0 - k) * (1.0 + k)).sqrt();
        Ok(Self { k, k_prime })
    }

    /// Modulus from its complement `k'`. Requires `0 < k' <= 1`.
    ///
    /// This is the cancellation-free constructor for `k` close to 1 (tiny
    /// `k'`); the stored `k` may round to exactly 1.0 but the complement stays
    /// exact, which is what the AGM consumes.
    pub fn from_complement(k_prime: f64) -> Result<Self, EllipticError> {
        if !(k_prime > 0.0 && k_prime <= 1.0) {
            return Err(EllipticError::InvalidModulus(1.0 - k_prime));
        }
        let k = ((1.0 - k_prime) * (1.0 + k_prime)).sqrt();
        Ok(Self { k, k_prime })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn k_prime(&self) -> f64 {
        self.k_prime
    }

    /// Complete elliptic integral of the first kind, `K(k) = pi / (2 AGM(1, k'))`.
    pub fn complete_k(&self) -> f64 {
        std::f64::consts::FRAC_PI_2 / agm(1.0, self.k_prime)
    }

    /// Jacobi elliptic function `dn(u, k)` for `u` restricted to `[0, K/2]`.
    ///
    /// Descending Landen transformation in phase form (the AGM scale factors
    /// double the argument per level, the arcsin recursion brings the phase
    /// back down). `dn = cos(phi_0) / cos(phi_1 - phi_0)` stays accurate down
    /// to `dn ~ sqrt(k')`, which is the smallest value attained on this range.
    fn dn_half_range(&self, u: f64) -> f64 {
        debug_assert!(u >= 0.0);
        if u == 0.0 {
            return 1.0;
        }
        // Degenerate modulus: dn(u, k) = sqrt(1 - k^2 sin^2 u) + O(k^4).
        if self.k < 1e-8 {
            let s = self.k * u.sin();
            return (1.0 - s * s).sqrt();
        }
        let mut a = vec![1.0f64];
        let mut c = vec![self.k];
        let mut b = self.k_prime;
        for n in 0.. {
            if c[n].abs() <= AGM_TOL * a[n] {
                break;
            }
            assert!(n < AGM_MAX_ITER, "Landen recursion failed to converge");
            let an = 0.5 * (a[n] + b);
            let cn = 0.5 * (a[n] - b);
            b = (a[n] * b).sqrt();
            a.push(an);
            c.push(cn);
        }
        // k >= 1e-8 guarantees at least one Landen level.
        let levels = a.len() - 1;
        let mut phi = (1u64 << levels) as f64 * a[levels] * u;
        let mut phi_next = phi;
        for n in (1..=levels).rev() {
            let ratio = (c[n] / a[n] * phi.sin()).clamp(-1.0, 1.0);
            phi_next = phi;
            phi = 0.5 * (phi + ratio.asin());
        }
        phi.cos() / (phi_next - phi).cos()
    }

    /// Jacobi elliptic function `dn(u, k)` for any finite `u`.
    ///
    /// `dn` is even with period `2K`; arguments beyond `K/2` are folded back
    /// through `dn(u) = k' / dn(K - u)` so the phase recursion only ever runs
    /// on `[0, K/2]`, where it is well conditioned.
    pub fn dn(&self, u: f64) -> f64 {
        if self.k == 0.0 {
            return 1.0;
        }
        let big_k = self.complete_k();
        let period = 2.0 * big_k;
        let mut v = u.abs() % period;
        if v > big_k {
            v = period - v;
        }
        if v > 0.5 * big_k {
            self.k_prime / self.dn_half_range(big_k - v)
        } else {
            self.dn_half_range(v)
        }
    }
}

/// Arithmetic-geometric mean of `a0 >= b0 >= 0`.
fn agm(a0: f64, b0: f64) -> f64 {
    let (mut a, mut b) = (a0, b0);
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() <= AGM_TOL * a {
            return a;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    a
}

/// Complete elliptic integral of the first kind `K(k)` with `k` the modulus.
pub fn elliptic_k(k: f64) -> Result<f64, EllipticError> {
    Ok(EllipticModulus::new(k)?.complete_k())
}

/// Jacobi elliptic function `dn(u, k)` with `k` the modulus.
pub fn jacobi_dn(u: f64, k: f64) -> Result<f64, EllipticError> {
    Ok(EllipticModulus::new(k)?.dn(u))
}

/// An ordered set of Zolotarev points on a positive interval.
#[derive(Debug, Clone)]
pub struct ZolotarevSet {
    interval_lo: f64,
    interval_hi: f64,
    points: Vec<f64>,
}

impl ZolotarevSet {
    pub fn interval_lo(&self) -> f64 {
        self.interval_lo
    }

    pub fn interval_hi(&self) -> f64 {
        self.interval_hi
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// The `r` Zolotarev points `Z_1 < ... < Z_r` on `[delta, 1]`,
///
/// `Z_j = dn((2(r-j)+1) / (2r) * K(delta'), delta')` with `delta' = sqrt(1 - delta^2)`.
///
/// The points cluster geometrically towards the left endpoint `delta`. For
/// arguments past the half period the reflection `dn(u) = delta / dn(K - u)`
/// is applied with `K - u` formed exactly from the index arithmetic, so the
/// smallest points retain full relative accuracy even for `delta` near
/// underflow of `1 - delta'`.
pub fn zolotarev_points(delta: f64, r: usize) -> Result<ZolotarevSet, EllipticError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(EllipticError::InvalidDelta(delta));
    }
    if r == 0 {
        return Err(EllipticError::EmptyPointSet);
    }
    let modulus = EllipticModulus::from_complement(delta)?;
    let big_k = modulus.complete_k();
    let two_r = (2 * r) as f64;
    let mut points = Vec::with_capacity(r);
    for j in 1..=r {
        let num = (2 * (r - j) + 1) as f64;
        let z = if 2 * (r - j) + 1 > r {
            // dn(u) = k' / dn(K - u); here K - u = (2j - 1)/(2r) * K exactly.
            delta / modulus.dn_half_range((2 * j - 1) as f64 / two_r * big_k)
        } else {
            modulus.dn_half_range(num / two_r * big_k)
        };
        points.push(z);
    }
    debug_assert!(points.windows(2).all(|w| w[0] < w[1]));
    Ok(ZolotarevSet {
        interval_lo: delta,
        interval_hi: 1.0,
        points,
    })
}

/// Transformed Zolotarev points `b * Z_j` on `[a, b]`, where the `Z_j` are the
/// Zolotarev points on `[a/b, 1]`.
pub fn transformed_zolotarev(a: f64, b: f64, r: usize) -> Result<ZolotarevSet, EllipticError> {
    if !(a > 0.0 && b > a) {
        return Err(EllipticError::InvalidInterval(a, b));
    }
    let base = zolotarev_points(a / b, r)?;
    Ok(ZolotarevSet {
        interval_lo: a,
        interval_hi: b,
        points: base.points.iter().map(|z| b * z).collect(),
    })
}

/// The constants entering the reduced basis decay rate for a spectral
/// interval of condition number `kappa`.
#[derive(Debug, Clone, Copy)]
pub struct RateConstants {
    pub kappa: f64,
    pub delta: f64,
    pub mu: f64,
    pub mu1: f64,
    pub c_star: f64,
}

impl RateConstants {
    /// `C* = pi K(mu_1) / (4 K(mu))` with `mu = ((1 - sqrt(delta)) / (1 + sqrt(delta)))^2`,
    /// `mu_1 = sqrt(1 - mu^2)`, and `delta = 1/kappa`.
    ///
    /// `mu` and `mu_1` are exact complements of one another, so both integrals
    /// reduce to a single AGM each: `C* = (pi/4) AGM(1, mu_1) / AGM(1, mu)`.
    pub fn for_kappa(kappa: f64) -> Result<Self, EllipticError> {
        if !(kappa > 1.0) || !kappa.is_finite() {
            return Err(EllipticError::InvalidKappa(kappa));
        }
        let delta = 1.0 / kappa;
        let sd = delta.sqrt();
        let mu = ((1.0 - sd) / (1.0 + sd)).powi(2);
        // 1 - mu = 4 sqrt(delta) / (1 + sqrt(delta))^2, free of cancellation.
        let one_minus_mu = 4.0 * sd / ((1.0 + sd) * (1.0 + sd));
        let mu1 = (one_minus_mu * (1.0 + mu)).sqrt();
        let c_star = std::f64::consts::FRAC_PI_4 * agm(1.0, mu1) / agm(1.0, mu);
        Ok(Self {
            kappa,
            delta,
            mu,
            mu1,
            c_star,
        })
    }
}

/// Decay-rate constant `C*(kappa)`; decreasing in `kappa`, asymptotically
/// `O(1 / ln(kappa))`.
pub fn decay_rate_c_star(kappa: f64) -> Result<f64, EllipticError> {
    Ok(RateConstants::for_kappa(kappa)?.c_star)
}
