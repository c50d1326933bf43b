//! Pole nodes and weights for the rational approximation of `1/(x − z)`.
//!
//! For a positive interval `[m, M]` the resolvent is written as a Cauchy
//! integral over a closed curve around the interval. The curve is the image
//! of the line `Im t = K'/2` of the rectangle `[−K, K] × [0, K']` under
//!
//! ```text
//! w(t) = m·M · (1/k + sn(t|k)) / (1/k − sn(t|k)),   k = (M/m − 1)/(M/m + 1)
//! ξ(t) = √w(t)   (principal branch)
//! ```
//!
//! The `w`-plane map encloses the squared interval `[m², M²]` and avoids the
//! cut `(−∞, 0]`; taking the square root puts the whole curve in the right
//! half-plane, so every shift with `Re z ≤ 0` stays outside it. The
//! trapezoidal rule in `t` then gives
//!
//! ```text
//! 1/(x − z) ≈ f_P(x; z) = Σ_k ω_k / ((ξ_k − z)(x − ξ_k))
//! ```
//!
//! whose error decays like `exp(−C P / log(M/m))` uniformly in `z`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::elliptic::EllipticModulus;
use crate::error::{Error, Result};
use crate::linalg::C64;

/// Largest pole count `required_poles` will try.
pub const MAX_POLES: usize = 4096;

/// Enclosing interval `[m, M]` of the (positive part of the) spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralBounds {
    lower: f64,
    upper: f64,
}

impl SpectralBounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower > 0.0) || !(upper > lower) || !upper.is_finite() {
            return Err(Error::Domain(format!(
                "spectral bounds need 0 < m < M, got ({lower}, {upper})"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }
}

/// Intermediate quantities of the conformal map.
#[derive(Debug, Clone)]
pub struct ContourParameters {
    pub modulus: EllipticModulus,
    pub k_complete: f64,
    pub k_prime_complete: f64,
    /// Trapezoidal midpoints `t_j` on the line `Im t = K'/2`.
    pub t_nodes: Vec<C64>,
    pub bounds: SpectralBounds,
    pub poles: usize,
}

impl ContourParameters {
    pub fn new(bounds: SpectralBounds, poles: usize) -> Result<Self> {
        validate_pole_count(poles)?;
        let ratio = bounds.upper / bounds.lower;
        // squared variable: the map encloses [m², M²], whose sqrt-ratio is M/m
        let modulus = EllipticModulus::from_interval_ratio(ratio * ratio)?;
        let k_complete = modulus.complete_k()?;
        let k_prime_complete = modulus.complete_k_prime()?;
        let half = poles / 2;
        let step = 2.0 * k_complete / half as f64;
        let t_nodes = (1..=half)
            .map(|j| C64::new(-k_complete + (j as f64 - 0.5) * step, 0.5 * k_prime_complete))
            .collect();
        Ok(Self {
            modulus,
            k_complete,
            k_prime_complete,
            t_nodes,
            bounds,
            poles,
        })
    }
}

fn validate_pole_count(poles: usize) -> Result<()> {
    if poles < 2 || !poles.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "pole count must be even and at least 2, got {poles}"
        )));
    }
    Ok(())
}

/// Conjugate-closed set of pole nodes `ξ_k` and weights `ω_k`.
///
/// The first `P/2` entries come from the upper half of the curve; entry
/// `P/2 + j` is the complex conjugate of entry `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleContour {
    nodes: Vec<C64>,
    weights: Vec<C64>,
    bounds: SpectralBounds,
}

impl PoleContour {
    pub fn poles(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[C64] {
        &self.weights
    }

    pub fn bounds(&self) -> SpectralBounds {
        self.bounds
    }

    /// Upper-half representatives `(ξ_j, ω_j)`, `j < P/2`.
    pub fn upper_half(&self) -> impl Iterator<Item = (C64, C64)> + '_ {
        let half = self.nodes.len() / 2;
        self.nodes[..half]
            .iter()
            .copied()
            .zip(self.weights[..half].iter().copied())
    }

    /// Index of the conjugate partner of node `j`.
    pub fn partner(&self, j: usize) -> usize {
        let half = self.nodes.len() / 2;
        if j < half {
            j + half
        } else {
            j - half
        }
    }

    /// Smallest distance from a node to the interval `[m, M]`.
    pub fn min_distance_to_interval(&self) -> f64 {
        self.nodes
            .iter()
            .map(|xi| {
                let x = xi.re.clamp(self.bounds.lower, self.bounds.upper);
                (xi - x).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Combination coefficients `ω_k/(ξ_k − z)` for one shift.
    pub fn shift_coefficients(&self, z: C64) -> Vec<C64> {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(xi, w)| w / (xi - z))
            .collect()
    }

    pub fn to_document(&self) -> ContourDocument {
        ContourDocument {
            poles: self.poles(),
            lower: self.bounds.lower,
            upper: self.bounds.upper,
            nodes: self.nodes.iter().map(|c| [c.re, c.im]).collect(),
            weights: self.weights.iter().map(|c| [c.re, c.im]).collect(),
        }
    }

    pub fn from_document(doc: &ContourDocument) -> Result<Self> {
        validate_pole_count(doc.poles)?;
        if doc.nodes.len() != doc.poles || doc.weights.len() != doc.poles {
            return Err(Error::Invalid(format!(
                "contour document lists {} nodes and {} weights for P = {}",
                doc.nodes.len(),
                doc.weights.len(),
                doc.poles
            )));
        }
        let to_c = |v: &Vec<[f64; 2]>| v.iter().map(|p| C64::new(p[0], p[1])).collect::<Vec<_>>();
        Ok(Self {
            nodes: to_c(&doc.nodes),
            weights: to_c(&doc.weights),
            bounds: SpectralBounds::new(doc.lower, doc.upper)?,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_document(&serde_json::from_str(s)?)
    }
}

/// On-disk form of a contour.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContourDocument {
    #[serde(rename = "P")]
    pub poles: usize,
    #[serde(rename = "m")]
    pub lower: f64,
    #[serde(rename = "M")]
    pub upper: f64,
    pub nodes: Vec<[f64; 2]>,
    pub weights: Vec<[f64; 2]>,
}

/// Builds the `P`-pole contour for `bounds`.
pub fn build_contour(bounds: SpectralBounds, poles: usize) -> Result<PoleContour> {
    let params = ContourParameters::new(bounds, poles)?;
    let k = params.modulus.k();
    let k_inv = 1.0 / k;
    let scale = bounds.lower * bounds.upper;
    let step = 2.0 * params.k_complete / (poles / 2) as f64;
    let two_pi_i = C64::new(0.0, 2.0 * PI);

    let mut nodes = Vec::with_capacity(poles);
    let mut weights = Vec::with_capacity(poles);
    for &t in &params.t_nodes {
        let (sn, cn, dn) = params.modulus.sn_cn_dn(t)?;
        let denom = k_inv - sn;
        let w = scale * (k_inv + sn) / denom;
        let dw_dt = scale * 2.0 * k_inv * cn * dn / (denom * denom);
        let xi = w.sqrt();
        let dxi_dt = dw_dt / (2.0 * xi);
        // The upper arc runs left to right (clockwise); together with the
        // sign flip between Cauchy's (ξ − x) and the (x − ξ) of f_P this gives
        // ω = +h ξ'(t) / (2πi).
        nodes.push(xi);
        weights.push(step * dxi_dt / two_pi_i);
    }
    let upper = nodes.len();
    for j in 0..upper {
        nodes.push(nodes[j].conj());
        weights.push(weights[j].conj());
    }
    Ok(PoleContour {
        nodes,
        weights,
        bounds,
    })
}

fn check_shift(z: C64) -> Result<()> {
    if z.re > 0.0 || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::InvalidShift(z, "shifts must satisfy Re z <= 0".into()));
    }
    Ok(())
}

/// `f_P(x; z) = Σ_k ω_k / ((ξ_k − z)(x − ξ_k))`.
pub fn eval_scalar_expansion(contour: &PoleContour, x: f64, z: C64) -> Result<C64> {
    check_shift(z)?;
    Ok(eval_unchecked(contour, x, z))
}

fn eval_unchecked(contour: &PoleContour, x: f64, z: C64) -> C64 {
    contour
        .nodes
        .iter()
        .zip(&contour.weights)
        .map(|(xi, w)| w / ((xi - z) * (x - xi)))
        .sum()
}

/// `max |f_P(x; z) − 1/(x − z)|` over `n_samples` equispaced `x` in `interval`.
pub fn scalar_error_sup(
    contour: &PoleContour,
    interval: (f64, f64),
    z: C64,
    n_samples: usize,
) -> Result<f64> {
    check_shift(z)?;
    let (a, b) = interval;
    if !(a > 0.0 && b >= a) {
        return Err(Error::Domain(format!("interval ({a}, {b}) must lie in (0, inf)")));
    }
    if n_samples < 2 {
        return Err(Error::Domain("need at least two samples".into()));
    }
    let coeffs = contour.shift_coefficients(z);
    let h = (b - a) / (n_samples - 1) as f64;
    let mut sup: f64 = 0.0;
    for i in 0..n_samples {
        let x = if i + 1 == n_samples { b } else { a + i as f64 * h };
        let approx: C64 = coeffs
            .iter()
            .zip(&contour.nodes)
            .map(|(c, xi)| c / (x - xi))
            .sum();
        let exact = 1.0 / (x - z);
        sup = sup.max((approx - exact).norm());
    }
    Ok(sup)
}

/// Smallest even pole count whose sup error on `bounds` at `z` is `≤ tol`.
///
/// Doubles from `P = 2` until the tolerance is met, then bisects over even
/// counts between the last failing and first passing value.
pub fn required_poles(bounds: SpectralBounds, z: C64, tol: f64, n_samples: usize) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let interval = (bounds.lower, bounds.upper);
    let passes = |p: usize| -> Result<bool> {
        let c = build_contour(bounds, p)?;
        Ok(scalar_error_sup(&c, interval, z, n_samples)? <= tol)
    };
    if passes(2)? {
        return Ok(2);
    }
    let mut fail = 2;
    let mut pass = 4;
    loop {
        if pass > MAX_POLES {
            return Err(Error::Convergence(format!(
                "tolerance {tol:e} not reached with {MAX_POLES} poles"
            )));
        }
        if passes(pass)? {
            break;
        }
        fail = pass;
        pass *= 2;
    }
    // invariant: fail fails, pass passes, both even
    while pass - fail > 2 {
        let mid = (fail + pass) / 2;
        let mid = mid - mid % 2;
        if passes(mid)? {
            pass = mid;
        } else {
            fail = mid;
        }
    }
    Ok(pass)
}
