//! Complete elliptic integrals and Jacobi elliptic functions.
//!
//! All functions take the modulus `k`, not the parameter `m = k^2`. Tables
//! and libraries differ on this; here `K(k) = ∫₀^{π/2} dθ / √(1 − k² sin²θ)`.
//!
//! `K` is evaluated with the arithmetic–geometric mean and `sn`, `cn`, `dn`
//! at complex argument with the descending Landen (Gauss) transformation,
//! which is valid inside the strip `|Im t| < K'(k)`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};

const AGM_TOL: f64 = 1e-15;
const MAX_STEPS: usize = 64;
/// Moduli below this are treated as the trigonometric limit.
const LANDEN_FLOOR: f64 = 1e-15;

/// Elliptic modulus together with its complement, both kept at full
/// relative accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticModulus {
    k: f64,
    k_prime: f64,
}

impl EllipticModulus {
    pub fn new(k: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&k) {
            return Err(Error::Domain(format!("modulus k = {k} outside [0, 1)")));
        }
        // product form: no cancellation for k near 1
        let k_prime = ((1.0 - k) * (1.0 + k)).sqrt();
        Ok(Self { k, k_prime })
    }

    /// Modulus `(√r − 1)/(√r + 1)` of the annulus-type map for an interval
    /// with endpoint ratio `r = b/a > 1`. The complement `2 r^{1/4}/(√r + 1)`
    /// is formed directly so that it keeps full accuracy when `r` is large.
    pub fn from_interval_ratio(r: f64) -> Result<Self> {
        if !(r > 1.0) || !r.is_finite() {
            return Err(Error::Domain(format!("interval ratio {r} must exceed 1")));
        }
        let s = r.sqrt();
        let k = (s - 1.0) / (s + 1.0);
        let k_prime = 2.0 * s.sqrt() / (s + 1.0);
        Ok(Self { k, k_prime })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn k_prime(&self) -> f64 {
        self.k_prime
    }

    /// The complementary modulus as its own `EllipticModulus`.
    pub fn complement(&self) -> Self {
        Self {
            k: self.k_prime,
            k_prime: self.k,
        }
    }

    /// `K(k)`.
    pub fn complete_k(&self) -> Result<f64> {
        Ok(FRAC_PI_2 / agm(1.0, self.k_prime)?)
    }

    /// `K'(k) = K(k')`.
    pub fn complete_k_prime(&self) -> Result<f64> {
        if self.k == 0.0 {
            return Err(Error::Domain("K' diverges at k = 0".into()));
        }
        Ok(FRAC_PI_2 / agm(1.0, self.k)?)
    }

    /// `(sn, cn, dn)(t | k)` for complex `t` with `|Im t| < K'`.
    pub fn sn_cn_dn(&self, t: Complex64) -> Result<(Complex64, Complex64, Complex64)> {
        // descending Landen: k_{j+1} = (1 − k'_j)/(1 + k'_j)
        let mut moduli = Vec::with_capacity(8);
        let (mut k, mut kp) = (self.k, self.k_prime);
        while k > LANDEN_FLOOR {
            if moduli.len() == MAX_STEPS {
                return Err(Error::Convergence(format!(
                    "Landen recursion exceeded {MAX_STEPS} steps for k = {}",
                    self.k
                )));
            }
            let k_next = (1.0 - kp) / (1.0 + kp);
            // complement of the next modulus: 2√k'/(1 + k')
            let kp_next = 2.0 * kp.sqrt() / (1.0 + kp);
            moduli.push(k_next);
            k = k_next;
            kp = kp_next;
        }
        let mut arg = t;
        for &kn in &moduli {
            arg /= 1.0 + kn;
        }
        let mut sn = arg.sin();
        let mut cn = arg.cos();
        let mut dn = Complex64::new(1.0, 0.0);
        for &kn in moduli.iter().rev() {
            let q = kn * sn * sn;
            let denom = 1.0 + q;
            let sn_up = (1.0 + kn) * sn / denom;
            let cn_up = cn * dn / denom;
            let dn_up = (1.0 - q) / denom;
            sn = sn_up;
            cn = cn_up;
            dn = dn_up;
        }
        Ok((sn, cn, dn))
    }
}

fn agm(a0: f64, b0: f64) -> Result<f64> {
    let (mut a, mut b) = (a0, b0);
    for _ in 0..MAX_STEPS {
        if (a - b).abs() <= AGM_TOL * a {
            return Ok(a);
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    Err(Error::Convergence(format!("AGM did not converge from ({a0}, {b0})")))
}

/// Complete elliptic integral of the first kind `K(k)`, `0 ≤ k < 1`.
pub fn complete_k(k: f64) -> Result<f64> {
    EllipticModulus::new(k)?.complete_k()
}

/// `K'(k) = K(√(1 − k²))`, `0 < k < 1`.
pub fn complete_k_prime(k: f64) -> Result<f64> {
    if !(k > 0.0 && k < 1.0) {
        return Err(Error::Domain(format!("K'(k) needs 0 < k < 1, got {k}")));
    }
    EllipticModulus::new(k)?.complete_k_prime()
}

/// Jacobi elliptic functions `sn`, `cn`, `dn` at complex argument.
pub fn jacobi_sn_cn_dn(t: Complex64, k: f64) -> Result<(Complex64, Complex64, Complex64)> {
    EllipticModulus::new(k)?.sn_cn_dn(t)
}
