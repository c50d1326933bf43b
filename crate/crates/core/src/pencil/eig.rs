use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, C64};

use super::Pencil;

/// Largest dimension accepted by the dense oracle.
pub const MAX_ORACLE_DIM: usize = 2000;

/// Eigenpairs of `H ψ = λ S ψ`, eigenvalues non-increasing and eigenvectors
/// S-orthonormal (columns of `psi`).
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub lambdas: Vec<f64>,
    pub psi: DenseMatrix,
}

/// Eigenpairs split by the sign of the eigenvalue. Zero eigenvalues count as
/// negative.
#[derive(Debug, Clone)]
pub struct IndefiniteSplit {
    pub m_pos: usize,
    pub lambda_plus: Vec<f64>,
    pub lambda_minus: Vec<f64>,
    pub psi_plus: DenseMatrix,
    pub psi_minus: DenseMatrix,
}

pub fn dense_generalized_eig(pencil: &Pencil) -> Result<EigenDecomposition> {
    let n = pencil.dim();
    if n > MAX_ORACLE_DIM {
        return Err(Error::Invalid(format!(
            "dense eigensolver limited to n <= {MAX_ORACLE_DIM}, got {n}"
        )));
    }
    let h = pencil.h().to_dense();
    // C = R⁻* H R⁻¹ = X* H X with X = R⁻¹
    let x = pencil.cholesky().map(|f| f.inverse_dense());
    let mut c = match &x {
        Some(x) => x.adjoint() * &h * x,
        None => h,
    };
    c = (&c + c.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let lambdas = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let y = DenseMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    let psi = match &x {
        Some(x) => x * y,
        None => y,
    };
    Ok(EigenDecomposition { lambdas, psi })
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    pub fn split(&self) -> IndefiniteSplit {
        let m_pos = self.lambdas.iter().take_while(|&&l| l > 0.0).count();
        let n = self.dim();
        IndefiniteSplit {
            m_pos,
            lambda_plus: self.lambdas[..m_pos].to_vec(),
            lambda_minus: self.lambdas[m_pos..].to_vec(),
            psi_plus: self.psi.columns(0, m_pos).into_owned(),
            psi_minus: self.psi.columns(m_pos, n - m_pos).into_owned(),
        }
    }

    /// Exact resolvent solve `Ψ (Λ − z)⁻¹ Ψ* b`.
    pub fn resolvent_solve(&self, z: C64, b: &[C64]) -> Vec<C64> {
        let n = self.dim();
        let bv = nalgebra::DVector::from_column_slice(b);
        let mut coef = self.psi.adjoint() * bv;
        for i in 0..n {
            coef[i] /= C64::new(self.lambdas[i], 0.0) - z;
        }
        (&self.psi * coef).as_slice().to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_entry;
    use crate::pencil::HermitianOperator;

    fn pencil() -> Pencil {
        let n = 8;
        let h = DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(i as f64 - 3.5, 0.0)
            } else if i + 1 == j {
                C64::new(0.4, 0.2)
            } else if j + 1 == i {
                C64::new(0.4, -0.2)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let s = DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(2.0, 0.0)
            } else if i.abs_diff(j) == 1 {
                C64::new(0.5, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Pencil::new(HermitianOperator::dense(h).unwrap(), Some(HermitianOperator::dense(s).unwrap())).unwrap()
    }

    #[test]
    fn eigenpairs_satisfy_the_pencil() {
        let p = pencil();
        let e = dense_generalized_eig(&p).unwrap();
        let h = p.h().to_dense();
        let s = p.s().unwrap().to_dense();
        let res = &h * &e.psi - &s * &e.psi * DenseMatrix::from_diagonal(&nalgebra::DVector::from_iterator(8, e.lambdas.iter().map(|&l| C64::new(l, 0.0))));
        assert!(max_abs_entry(&res) < 1e-12);
        let gram = e.psi.adjoint() * &s * &e.psi;
        assert!(max_abs_entry(&(gram - DenseMatrix::identity(8, 8))) < 1e-12);
        assert!(e.lambdas.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn split_and_resolvent() {
        let p = pencil();
        let e = dense_generalized_eig(&p).unwrap();
        let sp = e.split();
        assert_eq!(sp.m_pos + sp.lambda_minus.len(), 8);
        assert!(sp.lambda_plus.iter().all(|&l| l > 0.0));
        assert!(sp.lambda_minus.iter().all(|&l| l <= 0.0));
        let b: Vec<C64> = (0..8).map(|i| C64::new(1.0, i as f64)).collect();
        let z = C64::new(-0.5, 1.0);
        let u = e.resolvent_solve(z, &b);
        assert!(p.relative_residual(z, &u, &b) < 1e-12);
    }
}
