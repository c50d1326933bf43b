//! Small dense vector kernels on complex slices.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type DenseMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Conjugated inner product `x* y`.
pub fn dot(x: &[C64], y: &[C64]) -> C64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Bilinear (unconjugated) product `x^T y`.
pub fn dotu(x: &[C64], y: &[C64]) -> C64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm(x: &[C64]) -> f64 {
    x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// `y += a x`
pub fn axpy(a: C64, x: &[C64], y: &mut [C64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn scale(a: C64, x: &mut [C64]) {
    for xi in x.iter_mut() {
        *xi *= a;
    }
}

pub fn sub(x: &[C64], y: &[C64]) -> Vec<C64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub fn conj(x: &[C64]) -> Vec<C64> {
    x.iter().map(|a| a.conj()).collect()
}

pub fn is_real(x: &[C64]) -> bool {
    x.iter().all(|a| a.im == 0.0)
}

pub fn to_complex(x: &[f64]) -> Vec<C64> {
    x.iter().map(|&a| C64::new(a, 0.0)).collect()
}

pub fn max_abs(x: &[C64]) -> f64 {
    x.iter().fold(0.0, |m, a| m.max(a.norm()))
}

/// Dense matrix-vector product.
pub fn dense_matvec(a: &DenseMatrix, x: &[C64], y: &mut [C64]) {
    let (nr, nc) = a.shape();
    debug_assert_eq!(nc, x.len());
    debug_assert_eq!(nr, y.len());
    y.iter_mut().for_each(|v| *v = ZERO);
    for (j, &xj) in x.iter().enumerate() {
        if xj == ZERO {
            continue;
        }
        let col = a.column(j);
        for (yi, aij) in y.iter_mut().zip(col.iter()) {
            *yi += aij * xj;
        }
    }
}

pub fn max_abs_entry(a: &DenseMatrix) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.norm()))
}
