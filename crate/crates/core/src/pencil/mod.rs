//! Hermitian operators and matrix pencils `(H, S)`.

mod bounds;
mod cholesky;
mod eig;
pub mod matrix_market;
mod projection;

pub use bounds::{estimate_spectral_bounds, estimate_spectral_bounds_projected, DEFAULT_BOUND_ITERS, DEFAULT_SAFETY};
pub use cholesky::{cholesky, CholeskyFactor};
pub use eig::{dense_generalized_eig, EigenDecomposition, IndefiniteSplit, MAX_ORACLE_DIM};
pub use matrix_market::{
    format_matrix_market, format_vector, parse_matrix_market, parse_vector, read_matrix_market, read_vector,
    write_matrix_market, write_vector,
};
pub use projection::{negative_leakage, project_out, project_out_rhs, rhs_leakage, s_norm, s_orthonormalize};

use crate::error::{Error, Result};
use crate::linalg::{dense_matvec, max_abs_entry, DenseMatrix, C64, ZERO};
use crate::sparse::CsrMatrix;

const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub enum Storage {
    Dense(DenseMatrix),
    Sparse(CsrMatrix),
}

impl Storage {
    pub fn dim(&self) -> usize {
        match self {
            Storage::Dense(a) => a.nrows(),
            Storage::Sparse(a) => a.dim(),
        }
    }

    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        match self {
            Storage::Dense(a) => dense_matvec(a, x, y),
            Storage::Sparse(a) => a.matvec(x, y),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Storage::Dense(a) => a.clone(),
            Storage::Sparse(a) => a.to_dense(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            Storage::Dense(a) => max_abs_entry(a),
            Storage::Sparse(a) => a.max_abs(),
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            Storage::Dense(a) => a.iter().all(|v| v.im == 0.0),
            Storage::Sparse(a) => a.is_real(),
        }
    }
}

/// A Hermitian matrix, dense or sparse, validated on construction.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    storage: Storage,
    real: bool,
}

impl HermitianOperator {
    pub fn dense(a: DenseMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Invalid(format!("matrix is {}x{}, not square", a.nrows(), a.ncols())));
        }
        let defect = max_abs_entry(&(&a - a.adjoint()));
        let scale = max_abs_entry(&a);
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(format!("max |A - A*| = {defect:e}, max |A| = {scale:e}")));
        }
        Self::from_storage(Storage::Dense(a))
    }

    pub fn sparse(a: CsrMatrix) -> Result<Self> {
        let defect = a.hermitian_defect();
        let scale = a.max_abs();
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(format!("max |A - A*| = {defect:e}, max |A| = {scale:e}")));
        }
        Self::from_storage(Storage::Sparse(a))
    }

    pub fn dense_real(a: &nalgebra::DMatrix<f64>) -> Result<Self> {
        Self::dense(a.map(|v| C64::new(v, 0.0)))
    }

    pub fn identity(n: usize) -> Self {
        Self {
            storage: Storage::Sparse(CsrMatrix::identity(n)),
            real: true,
        }
    }

    fn from_storage(storage: Storage) -> Result<Self> {
        let real = storage.is_real();
        Ok(Self { storage, real })
    }

    pub fn dim(&self) -> usize {
        self.storage.dim()
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.storage.apply(x, y)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        self.storage.to_dense()
    }

    pub fn to_csr(&self) -> CsrMatrix {
        match &self.storage {
            Storage::Dense(a) => CsrMatrix::from_dense(a),
            Storage::Sparse(a) => a.clone(),
        }
    }
}

/// The pencil `(H, S)` with `S` Hermitian positive definite, or the
/// identity. When `S` is given, its Cholesky factor is computed on
/// construction; a failed factorization is the definiteness check.
#[derive(Debug, Clone)]
pub struct Pencil {
    h: HermitianOperator,
    s: Option<HermitianOperator>,
    chol: Option<CholeskyFactor>,
}

impl Pencil {
    pub fn new(h: HermitianOperator, s: Option<HermitianOperator>) -> Result<Self> {
        let chol = match &s {
            Some(s) => {
                if s.dim() != h.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: h.dim(),
                        got: s.dim(),
                    });
                }
                Some(cholesky(s)?)
            }
            None => None,
        };
        Ok(Self { h, s, chol })
    }

    /// `S = I`.
    pub fn standard(h: HermitianOperator) -> Self {
        Self { h, s: None, chol: None }
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn h(&self) -> &HermitianOperator {
        &self.h
    }

    pub fn s(&self) -> Option<&HermitianOperator> {
        self.s.as_ref()
    }

    pub fn cholesky(&self) -> Option<&CholeskyFactor> {
        self.chol.as_ref()
    }

    pub fn has_identity_overlap(&self) -> bool {
        self.s.is_none()
    }

    pub fn is_real(&self) -> bool {
        self.h.is_real() && self.s.as_ref().is_none_or(|s| s.is_real())
    }

    pub fn apply_h(&self, x: &[C64], y: &mut [C64]) {
        self.h.apply(x, y)
    }

    pub fn apply_s(&self, x: &[C64], y: &mut [C64]) {
        match &self.s {
            Some(s) => s.apply(x, y),
            None => y.copy_from_slice(x),
        }
    }

    /// `y = (H − ξ S) x`
    pub fn apply_shifted(&self, xi: C64, x: &[C64], y: &mut [C64]) {
        self.h.apply(x, y);
        match &self.s {
            Some(s) => {
                let mut sx = vec![ZERO; x.len()];
                s.apply(x, &mut sx);
                for (yi, si) in y.iter_mut().zip(&sx) {
                    *yi -= xi * si;
                }
            }
            None => {
                for (yi, xi_) in y.iter_mut().zip(x) {
                    *yi -= xi * xi_;
                }
            }
        }
    }

    /// Relative residual `‖b − (H − z S) x‖₂ / ‖b‖₂`.
    pub fn relative_residual(&self, z: C64, x: &[C64], b: &[C64]) -> f64 {
        let mut ax = vec![ZERO; x.len()];
        self.apply_shifted(z, x, &mut ax);
        let r: f64 = ax.iter().zip(b).map(|(a, b)| (b - a).norm_sqr()).sum::<f64>().sqrt();
        let nb = crate::linalg::norm(b);
        if nb == 0.0 {
            r
        } else {
            r / nb
        }
    }

    /// Assembled `H − ξ S`, sparse when both parts are sparse.
    pub fn shifted_matrix(&self, xi: C64) -> Storage {
        let one = C64::new(1.0, 0.0);
        match (&self.h.storage, self.s.as_ref().map(|s| &s.storage)) {
            (Storage::Sparse(h), None) => Storage::Sparse(
                h.linear_combination(one, &CsrMatrix::identity(h.dim()), -xi)
                    .expect("same dimension"),
            ),
            (Storage::Sparse(h), Some(Storage::Sparse(s))) => {
                Storage::Sparse(h.linear_combination(one, s, -xi).expect("same dimension"))
            }
            _ => {
                let mut a = self.h.to_dense();
                match &self.s {
                    Some(s) => a -= s.to_dense() * xi,
                    None => {
                        for i in 0..a.nrows() {
                            a[(i, i)] -= xi;
                        }
                    }
                }
                Storage::Dense(a)
            }
        }
    }

    /// `b̃ = R⁻* b` (identity when `S = I`).
    pub fn transform_rhs(&self, b: &[C64]) -> Vec<C64> {
        match &self.chol {
            Some(r) => r.solve_rh(b),
            None => b.to_vec(),
        }
    }

    /// `u = R⁻¹ ũ`.
    pub fn back_transform(&self, u: &[C64]) -> Vec<C64> {
        match &self.chol {
            Some(r) => r.solve_r(u),
            None => u.to_vec(),
        }
    }

    /// `R x`.
    pub fn apply_r(&self, x: &[C64]) -> Vec<C64> {
        match &self.chol {
            Some(r) => r.apply_r(x),
            None => x.to_vec(),
        }
    }

    /// `y = R⁻* H R⁻¹ x`, the Hermitian operator of the standard problem.
    pub fn apply_transformed(&self, x: &[C64], y: &mut [C64]) {
        match &self.chol {
            Some(r) => {
                let t = r.solve_r(x);
                let mut ht = vec![ZERO; t.len()];
                self.h.apply(&t, &mut ht);
                y.copy_from_slice(&r.solve_rh(&ht));
            }
            None => self.h.apply(x, y),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut a = DenseMatrix::zeros(2, 2);
        a[(0, 1)] = C64::new(1.0, 1.0);
        a[(1, 0)] = C64::new(1.0, 1.0);
        assert!(matches!(HermitianOperator::dense(a.clone()), Err(Error::NotHermitian(_))));
        a[(1, 0)] = C64::new(1.0, -1.0);
        let op = HermitianOperator::dense(a).unwrap();
        assert!(!op.is_real());
    }

    #[test]
    fn shifted_apply_matches_assembled_matrix() {
        let h = CsrMatrix::from_triplets(3, &[(0, 0, c(2.0)), (0, 1, c(-1.0)), (1, 0, c(-1.0)), (1, 1, c(2.0)), (2, 2, c(5.0))]).unwrap();
        let s = CsrMatrix::from_triplets(3, &[(0, 0, c(2.0)), (1, 1, c(1.0)), (2, 2, c(3.0)), (1, 2, c(0.5)), (2, 1, c(0.5))]).unwrap();
        let p = Pencil::new(HermitianOperator::sparse(h).unwrap(), Some(HermitianOperator::sparse(s).unwrap())).unwrap();
        let xi = C64::new(0.3, -1.2);
        let x = vec![C64::new(1.0, 2.0), c(-1.0), C64::new(0.0, 0.5)];
        let mut y = vec![ZERO; 3];
        p.apply_shifted(xi, &x, &mut y);
        let mut y2 = vec![ZERO; 3];
        p.shifted_matrix(xi).apply(&x, &mut y2);
        for (a, b) in y.iter().zip(&y2) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn transform_round_trip() {
        let s = CsrMatrix::from_triplets(2, &[(0, 0, c(4.0)), (1, 1, c(9.0))]).unwrap();
        let h = HermitianOperator::identity(2);
        let p = Pencil::new(h, Some(HermitianOperator::sparse(s).unwrap())).unwrap();
        let b = vec![c(2.0), c(3.0)];
        let bt = p.transform_rhs(&b);
        assert!((bt[0] - 1.0).norm() < 1e-15 && (bt[1] - 1.0).norm() < 1e-15);
        let u = p.back_transform(&bt);
        assert!((u[0] - 0.5).norm() < 1e-15);
    }

    #[test]
    fn overlap_must_be_definite() {
        let s = CsrMatrix::from_triplets(2, &[(0, 0, c(1.0)), (1, 1, c(-1.0))]).unwrap();
        let r = Pencil::new(HermitianOperator::identity(2), Some(HermitianOperator::sparse(s).unwrap()));
        assert!(matches!(r, Err(Error::NotPositiveDefinite { .. })));
    }
}
