use super::{minimum_degree, reach, CsrMatrix};
use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};

/// Up-looking sparse Cholesky `P S Pᵀ = L L*` under a minimum-degree
/// ordering `P`.
#[derive(Debug, Clone)]
pub struct SparseCholesky {
    n: usize,
    /// `perm[new] = old`
    perm: Vec<usize>,
    diag: Vec<f64>,
    /// Strictly-lower entries of each column of `L`, rows ascending.
    col_rows: Vec<Vec<usize>>,
    col_vals: Vec<Vec<C64>>,
}

impl SparseCholesky {
    pub fn factor(s: &CsrMatrix) -> Result<Self> {
        let n = s.dim();
        let perm = minimum_degree(&s.symmetric_adjacency());
        let a = s.permute_symmetric(&perm);
        let scale = a.max_abs();
        let mut diag = vec![0.0; n];
        let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut col_vals: Vec<Vec<C64>> = vec![Vec::new(); n];
        let mut x = vec![ZERO; n];
        let mut marks = vec![usize::MAX; n];
        let mut pattern = Vec::new();

        for k in 0..n {
            let (cols, vals) = a.row(k);
            let mut akk = 0.0;
            // column k above the diagonal is the conjugate of row k left of it
            for (&j, v) in cols.iter().zip(vals) {
                if j < k {
                    x[j] = v.conj();
                } else if j == k {
                    akk = v.re;
                }
            }
            reach(
                cols.iter().copied().filter(|&j| j < k),
                |j| col_rows[j].as_slice(),
                &mut marks,
                k,
                &mut pattern,
            );
            let mut d = akk;
            for &j in &pattern {
                let yj = x[j] / diag[j];
                x[j] = ZERO;
                for (&i, l) in col_rows[j].iter().zip(&col_vals[j]) {
                    x[i] -= l * yj;
                }
                d -= yj.norm_sqr();
                col_rows[j].push(k);
                col_vals[j].push(yj.conj());
            }
            if !(d > 1e-14 * scale) {
                return Err(Error::NotPositiveDefinite { index: perm[k], pivot: d });
            }
            diag[k] = d.sqrt();
        }
        Ok(Self {
            n,
            perm,
            diag,
            col_rows,
            col_vals,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.n + self.col_rows.iter().map(Vec::len).sum::<usize>()
    }

    fn lower_solve(&self, x: &mut [C64]) {
        for j in 0..self.n {
            x[j] /= self.diag[j];
            let xj = x[j];
            for (&i, l) in self.col_rows[j].iter().zip(&self.col_vals[j]) {
                x[i] -= l * xj;
            }
        }
    }

    fn upper_solve(&self, x: &mut [C64]) {
        for j in (0..self.n).rev() {
            let mut s = x[j];
            for (&i, l) in self.col_rows[j].iter().zip(&self.col_vals[j]) {
                s -= l.conj() * x[i];
            }
            x[j] = s / self.diag[j];
        }
    }

    fn permute(&self, x: &[C64]) -> Vec<C64> {
        self.perm.iter().map(|&old| x[old]).collect()
    }

    fn unpermute(&self, y: &[C64]) -> Vec<C64> {
        let mut x = vec![ZERO; self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }

    /// `x` with `R x = y` where `R = L* P`.
    pub fn solve_r(&self, y: &[C64]) -> Vec<C64> {
        let mut t = y.to_vec();
        self.upper_solve(&mut t);
        self.unpermute(&t)
    }

    /// `x` with `R* x = y`.
    pub fn solve_rh(&self, y: &[C64]) -> Vec<C64> {
        let mut t = self.permute(y);
        self.lower_solve(&mut t);
        t
    }

    /// `R x`.
    pub fn apply_r(&self, x: &[C64]) -> Vec<C64> {
        let px = self.permute(x);
        let mut y = vec![ZERO; self.n];
        // (L* v)_j = d_j v_j + Σ_{i>j} conj(L_ij) v_i
        for j in 0..self.n {
            let mut s = px[j] * self.diag[j];
            for (&i, l) in self.col_rows[j].iter().zip(&self.col_vals[j]) {
                s += l.conj() * px[i];
            }
            y[j] = s;
        }
        y
    }

    /// `S⁻¹ y`.
    pub fn solve(&self, y: &[C64]) -> Vec<C64> {
        self.solve_r(&self.solve_rh(y))
    }
}
