//! Projections in the S-inner product against a basis `Ψ₋` with
//! `Ψ₋* S Ψ₋ = I`.
//!
//! Solutions are made S-orthogonal to the basis (`Ψ₋* S u = 0`). Right-hand
//! sides live in the dual space: the component of `u = (H − zS)⁻¹ b` along
//! `ψ_j` is `ψ_j* b / (λ_j − z)`, so a right-hand side is clean when
//! `Ψ₋* b = 0`, and its size is measured in the dual norm `‖R⁻* b‖₂`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{norm, DenseMatrix, C64, ZERO};

use super::Pencil;

fn check(basis: &DenseMatrix, pencil: &Pencil, len: usize) -> Result<()> {
    if basis.ncols() > 0 && basis.nrows() != pencil.dim() {
        return Err(Error::DimensionMismatch {
            expected: pencil.dim(),
            got: basis.nrows(),
        });
    }
    if len != pencil.dim() {
        return Err(Error::DimensionMismatch {
            expected: pencil.dim(),
            got: len,
        });
    }
    Ok(())
}

fn apply_s(pencil: &Pencil, x: &[C64]) -> Vec<C64> {
    let mut y = vec![ZERO; x.len()];
    pencil.apply_s(x, &mut y);
    y
}

/// `‖x‖_S = √(x* S x)`.
pub fn s_norm(pencil: &Pencil, x: &[C64]) -> f64 {
    norm(&pencil.apply_r(x))
}

/// Dual norm `‖R⁻* y‖₂`, the size of a right-hand side.
fn dual_norm(pencil: &Pencil, y: &[C64]) -> f64 {
    norm(&pencil.transform_rhs(y))
}

fn coefficients(basis: &DenseMatrix, y: &[C64]) -> DVector<C64> {
    basis.adjoint() * DVector::from_column_slice(y)
}

/// `x − Ψ₋(Ψ₋* S x)`, applied twice.
pub fn project_out(basis: &DenseMatrix, pencil: &Pencil, x: &[C64]) -> Result<Vec<C64>> {
    check(basis, pencil, x.len())?;
    let mut y = x.to_vec();
    if basis.ncols() == 0 {
        return Ok(y);
    }
    for _ in 0..2 {
        let c = coefficients(basis, &apply_s(pencil, &y));
        let corr = basis * c;
        for (yi, ci) in y.iter_mut().zip(corr.iter()) {
            *yi -= ci;
        }
    }
    Ok(y)
}

/// `b − S Ψ₋(Ψ₋* b)`, applied twice; the result satisfies `Ψ₋* b = 0`.
pub fn project_out_rhs(basis: &DenseMatrix, pencil: &Pencil, b: &[C64]) -> Result<Vec<C64>> {
    check(basis, pencil, b.len())?;
    let mut y = b.to_vec();
    if basis.ncols() == 0 {
        return Ok(y);
    }
    for _ in 0..2 {
        let c = coefficients(basis, &y);
        let corr = apply_s(pencil, (basis * c).as_slice());
        for (yi, ci) in y.iter_mut().zip(&corr) {
            *yi -= ci;
        }
    }
    Ok(y)
}

/// `max |Ψ₋* S x| / ‖x‖_S`, zero for `x = 0`.
pub fn negative_leakage(basis: &DenseMatrix, pencil: &Pencil, x: &[C64]) -> Result<f64> {
    check(basis, pencil, x.len())?;
    if basis.ncols() == 0 {
        return Ok(0.0);
    }
    let c = coefficients(basis, &apply_s(pencil, x));
    let m = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let nx = s_norm(pencil, x);
    Ok(if nx == 0.0 { m } else { m / nx })
}

/// `‖Ψ₋* b‖₂ / ‖R⁻* b‖₂ ∈ [0, 1]`, zero for `b = 0`.
pub fn rhs_leakage(basis: &DenseMatrix, pencil: &Pencil, b: &[C64]) -> Result<f64> {
    check(basis, pencil, b.len())?;
    if basis.ncols() == 0 {
        return Ok(0.0);
    }
    let m = coefficients(basis, b).norm();
    let nb = dual_norm(pencil, b);
    Ok(if nb == 0.0 { m } else { m / nb })
}

/// S-orthonormalize the columns (modified Gram–Schmidt, two passes).
/// Columns that are numerically dependent are dropped.
pub fn s_orthonormalize(basis: &DenseMatrix, pencil: &Pencil) -> Result<DenseMatrix> {
    if basis.ncols() == 0 {
        return Ok(basis.clone());
    }
    check(basis, pencil, basis.nrows())?;
    let mut kept: Vec<Vec<C64>> = Vec::with_capacity(basis.ncols());
    for j in 0..basis.ncols() {
        let mut v: Vec<C64> = basis.column(j).iter().copied().collect();
        let original = s_norm(pencil, &v);
        if original == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &kept {
                let sv = apply_s(pencil, &v);
                let c = crate::linalg::dot(q, &sv);
                crate::linalg::axpy(-c, q, &mut v);
            }
        }
        let nv = s_norm(pencil, &v);
        if nv <= 1e-10 * original {
            continue;
        }
        crate::linalg::scale(C64::new(1.0 / nv, 0.0), &mut v);
        kept.push(v);
    }
    let n = basis.nrows();
    Ok(DenseMatrix::from_fn(n, kept.len(), |i, j| kept[j][i]))
}
