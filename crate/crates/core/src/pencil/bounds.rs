use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::contour::SpectralBounds;
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, scale, DenseMatrix, C64, ZERO};

use super::Pencil;

pub const DEFAULT_BOUND_ITERS: usize = 50;
pub const DEFAULT_SAFETY: f64 = 0.05;
const SEED: u64 = 0x5eed_b0b5;

/// Interval enclosing the generalized spectrum, from Lanczos Ritz values of
/// `R⁻* H R⁻¹` widened by `safety`.
pub fn estimate_spectral_bounds(pencil: &Pencil, iters: usize, safety: f64) -> Result<SpectralBounds> {
    estimate_spectral_bounds_projected(pencil, None, iters, safety)
}

/// As [`estimate_spectral_bounds`], with the Lanczos vectors kept
/// S-orthogonal to `basis` so that only the remaining spectrum is bracketed.
pub fn estimate_spectral_bounds_projected(
    pencil: &Pencil,
    basis: Option<&DenseMatrix>,
    iters: usize,
    safety: f64,
) -> Result<SpectralBounds> {
    let (lo, hi) = ritz_extremes(pencil, basis, iters)?;
    if hi <= 0.0 {
        return Err(Error::NoPositiveSpectrum);
    }
    if lo <= 0.0 {
        return Err(Error::IndefiniteSpectrum(lo, hi));
    }
    SpectralBounds::new(lo / (1.0 + safety), hi * (1.0 + safety))
}

fn ritz_extremes(pencil: &Pencil, basis: Option<&DenseMatrix>, iters: usize) -> Result<(f64, f64)> {
    let n = pencil.dim();
    if iters == 0 || n == 0 {
        return Err(Error::Invalid("bound estimation needs iters >= 1 and n >= 1".into()));
    }
    // basis in the transformed variables: R Ψ₋ has orthonormal columns
    let tbasis: Vec<Vec<C64>> = basis
        .map(|b| {
            (0..b.ncols())
                .map(|j| pencil.apply_r(&b.column(j).iter().copied().collect::<Vec<_>>()))
                .collect()
        })
        .unwrap_or_default();
    let project = |v: &mut Vec<C64>| {
        for _ in 0..2 {
            for q in &tbasis {
                let c = dot(q, v);
                axpy(-c, q, v);
            }
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut v: Vec<C64> = (0..n).map(|_| C64::new(rng.random::<f64>() - 0.5, 0.0)).collect();
    project(&mut v);
    let nv = norm(&v);
    if nv == 0.0 {
        return Err(Error::NoPositiveSpectrum);
    }
    scale(C64::new(1.0 / nv, 0.0), &mut v);

    let steps = iters.min(n);
    let mut vs: Vec<Vec<C64>> = Vec::with_capacity(steps);
    let mut alphas = Vec::with_capacity(steps);
    let mut betas: Vec<f64> = Vec::with_capacity(steps);
    let mut w = vec![ZERO; n];
    let mut scale_est = 0.0f64;
    for k in 0..steps {
        pencil.apply_transformed(&v, &mut w);
        let a = dot(&v, &w).re;
        alphas.push(a);
        scale_est = scale_est.max(a.abs());
        vs.push(v.clone());
        // full re-orthogonalization keeps the extreme Ritz values clean
        for _ in 0..2 {
            for q in &vs {
                let c = dot(q, &w);
                axpy(-c, q, &mut w);
            }
        }
        project(&mut w);
        let b = norm(&w);
        scale_est = scale_est.max(b);
        if k + 1 == steps || b <= 1e-12 * scale_est {
            break;
        }
        betas.push(b);
        v = w.iter().map(|x| x / b).collect();
    }

    let m = alphas.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let ev = SymmetricEigen::new(t).eigenvalues;
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}
