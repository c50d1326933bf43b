use crate::error::{Error, Result};
use crate::linalg::{max_abs_entry, DenseMatrix, C64, ZERO};
use crate::sparse::SparseCholesky;

use super::{HermitianOperator, Storage};

/// `S = R* R`. For the sparse variant `R = L* P` is triangular only up to the
/// fill-reducing permutation, which none of the callers depend on.
#[derive(Debug, Clone)]
pub enum CholeskyFactor {
    Dense(DenseMatrix),
    Sparse(SparseCholesky),
}

pub fn cholesky(s: &HermitianOperator) -> Result<CholeskyFactor> {
    match s.storage() {
        Storage::Dense(a) => dense_cholesky(a).map(CholeskyFactor::Dense),
        Storage::Sparse(a) => SparseCholesky::factor(a).map(CholeskyFactor::Sparse),
    }
}

/// Upper triangular `R` with real positive diagonal.
fn dense_cholesky(s: &DenseMatrix) -> Result<DenseMatrix> {
    let n = s.nrows();
    let floor = 1e-14 * max_abs_entry(s);
    let mut r = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = s[(j, j)].re;
        for k in 0..j {
            d -= r[(k, j)].norm_sqr();
        }
        if !(d > floor) {
            return Err(Error::NotPositiveDefinite { index: j, pivot: d });
        }
        let rjj = d.sqrt();
        r[(j, j)] = C64::new(rjj, 0.0);
        for i in j + 1..n {
            let mut v = s[(j, i)];
            for k in 0..j {
                v -= r[(k, j)].conj() * r[(k, i)];
            }
            r[(j, i)] = v / rjj;
        }
    }
    Ok(r)
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        match self {
            Self::Dense(r) => r.nrows(),
            Self::Sparse(f) => f.dim(),
        }
    }

    /// `R⁻¹ y`
    pub fn solve_r(&self, y: &[C64]) -> Vec<C64> {
        match self {
            Self::Dense(r) => {
                let n = r.nrows();
                let mut x = y.to_vec();
                for i in (0..n).rev() {
                    let mut v = x[i];
                    for k in i + 1..n {
                        v -= r[(i, k)] * x[k];
                    }
                    x[i] = v / r[(i, i)];
                }
                x
            }
            Self::Sparse(f) => f.solve_r(y),
        }
    }

    /// `R⁻* y`
    pub fn solve_rh(&self, y: &[C64]) -> Vec<C64> {
        match self {
            Self::Dense(r) => {
                let n = r.nrows();
                let mut x = y.to_vec();
                for i in 0..n {
                    let mut v = x[i];
                    for k in 0..i {
                        v -= r[(k, i)].conj() * x[k];
                    }
                    x[i] = v / r[(i, i)];
                }
                x
            }
            Self::Sparse(f) => f.solve_rh(y),
        }
    }

    /// `R x`
    pub fn apply_r(&self, x: &[C64]) -> Vec<C64> {
        match self {
            Self::Dense(r) => {
                let n = r.nrows();
                let mut y = vec![ZERO; n];
                for i in 0..n {
                    for k in i..n {
                        y[i] += r[(i, k)] * x[k];
                    }
                }
                y
            }
            Self::Sparse(f) => f.apply_r(x),
        }
    }

    /// `S⁻¹ y`
    pub fn solve(&self, y: &[C64]) -> Vec<C64> {
        self.solve_r(&self.solve_rh(y))
    }

    /// `R⁻¹` as a dense matrix.
    pub fn inverse_dense(&self) -> DenseMatrix {
        let n = self.dim();
        let mut out = DenseMatrix::zeros(n, n);
        let mut e = vec![ZERO; n];
        for j in 0..n {
            e[j] = C64::new(1.0, 0.0);
            let col = self.solve_r(&e);
            e[j] = ZERO;
            for i in 0..n {
                out[(i, j)] = col[i];
            }
        }
        out
    }
}
