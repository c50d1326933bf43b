use crate::error::{Error, Result};
use crate::linalg::{max_abs_entry, DenseMatrix, C64};

/// Dense LU with partial pivoting, `P A = L U`, stored in place.
#[derive(Debug, Clone)]
pub struct DenseLu {
    lu: DenseMatrix,
    piv: Vec<usize>,
}

impl DenseLu {
    pub fn factor(mut a: DenseMatrix) -> Result<Self> {
        let n = a.nrows();
        let floor = n as f64 * f64::EPSILON * max_abs_entry(&a);
        let mut piv = (0..n).collect::<Vec<_>>();
        for k in 0..n {
            let (p, best) = (k..n)
                .map(|i| (i, a[(i, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best <= floor {
                return Err(Error::SingularPivot(k));
            }
            if p != k {
                a.swap_rows(p, k);
                piv.swap(p, k);
            }
            let d = a[(k, k)];
            for i in k + 1..n {
                let l = a[(i, k)] / d;
                a[(i, k)] = l;
                if l != C64::new(0.0, 0.0) {
                    for j in k + 1..n {
                        let u = a[(k, j)];
                        a[(i, j)] -= l * u;
                    }
                }
            }
        }
        Ok(Self { lu: a, piv })
    }

    pub fn dim(&self) -> usize {
        self.lu.nrows()
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.dim();
        let mut x: Vec<C64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut v = x[i];
            for (k, xk) in x.iter().enumerate().take(i) {
                v -= self.lu[(i, k)] * xk;
            }
            x[i] = v;
        }
        for i in (0..n).rev() {
            let mut v = x[i];
            for (k, xk) in x.iter().enumerate().skip(i + 1) {
                v -= self.lu[(i, k)] * xk;
            }
            x[i] = v / self.lu[(i, i)];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_with_pivoting() {
        // zero leading entry forces a row swap
        let a = DenseMatrix::from_row_slice(3, 3, &[
            C64::new(0.0, 0.0), C64::new(2.0, 1.0), C64::new(1.0, 0.0),
            C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, -1.0),
            C64::new(3.0, 0.0), C64::new(0.0, 0.0), C64::new(2.0, 0.0),
        ]);
        let lu = DenseLu::factor(a.clone()).unwrap();
        let b = vec![C64::new(1.0, 0.0), C64::new(0.0, 2.0), C64::new(-1.0, 0.5)];
        let x = lu.solve(&b);
        let mut ax = vec![C64::new(0.0, 0.0); 3];
        crate::linalg::dense_matvec(&a, &x, &mut ax);
        for (p, q) in ax.iter().zip(&b) {
            assert!((p - q).norm() < 1e-14);
        }
    }

    #[test]
    fn exact_singularity() {
        let a = DenseMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]));
        assert!(matches!(DenseLu::factor(a), Err(Error::SingularPivot(0))));
    }
}
