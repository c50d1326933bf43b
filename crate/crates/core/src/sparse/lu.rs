use super::{minimum_degree, reach, CsrMatrix};
use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};

const NONE: usize = usize::MAX;
/// Diagonal entries within this fraction of the column maximum are kept as
/// pivots, preserving the symmetric fill-reducing ordering.
const DIAG_PREFERENCE: f64 = 0.1;

/// Left-looking (Gilbert–Peierls) sparse LU with threshold partial pivoting
/// on top of a symmetric minimum-degree ordering.
#[derive(Debug, Clone)]
pub struct SparseLu {
    n: usize,
    perm: Vec<usize>,
    /// `pinv[row of permuted A] = pivot step`
    pinv: Vec<usize>,
    l_rows: Vec<Vec<usize>>,
    l_vals: Vec<Vec<C64>>,
    u_rows: Vec<Vec<usize>>,
    u_vals: Vec<Vec<C64>>,
    u_diag: Vec<C64>,
}

impl SparseLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.dim();
        let perm = minimum_degree(&a.symmetric_adjacency());
        // rows of the transpose are the columns of the permuted matrix
        let cols = a.permute_symmetric(&perm).transpose();
        let tiny = (n.max(1) as f64) * f64::EPSILON * a.max_abs();

        let mut pinv = vec![NONE; n];
        let mut l_rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut l_vals: Vec<Vec<C64>> = vec![Vec::new(); n];
        let mut u_rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut u_vals: Vec<Vec<C64>> = vec![Vec::new(); n];
        let mut u_diag = vec![ZERO; n];
        let mut x = vec![ZERO; n];
        let mut marks = vec![NONE; n];
        let mut pattern = Vec::new();

        for k in 0..n {
            let (rows, vals) = cols.row(k);
            for (&i, &v) in rows.iter().zip(vals) {
                x[i] = v;
            }
            {
                let pinv_ref = &pinv;
                let l_ref = &l_rows;
                reach(
                    rows.iter().copied(),
                    |i| {
                        let c = pinv_ref[i];
                        if c == NONE {
                            &[]
                        } else {
                            l_ref[c].as_slice()
                        }
                    },
                    &mut marks,
                    k,
                    &mut pattern,
                );
            }
            for &i in &pattern {
                let c = pinv[i];
                if c != NONE {
                    let xi = x[i];
                    for (&r, l) in l_rows[c].iter().zip(&l_vals[c]) {
                        x[r] -= l * xi;
                    }
                }
            }
            let mut best = NONE;
            let mut best_abs = -1.0;
            for &i in &pattern {
                if pinv[i] == NONE && (x[i].norm() > best_abs || (x[i].norm() == best_abs && i < best)) {
                    best_abs = x[i].norm();
                    best = i;
                }
            }
            if best == NONE || best_abs <= tiny {
                return Err(Error::SingularPivot(k));
            }
            let pivot_row = if pinv[k] == NONE && x[k].norm() >= DIAG_PREFERENCE * best_abs {
                k
            } else {
                best
            };
            let pivot = x[pivot_row];
            u_diag[k] = pivot;
            pinv[pivot_row] = k;
            for &i in &pattern {
                let c = pinv[i];
                if i == pivot_row {
                    // stored as the diagonal
                } else if c != NONE {
                    if x[i] != ZERO {
                        u_rows[k].push(c);
                        u_vals[k].push(x[i]);
                    }
                } else if x[i] != ZERO {
                    l_rows[k].push(i);
                    l_vals[k].push(x[i] / pivot);
                }
                x[i] = ZERO;
            }
        }
        // rename L rows into pivot steps
        for rows in &mut l_rows {
            for r in rows.iter_mut() {
                *r = pinv[*r];
            }
        }
        Ok(Self {
            n,
            perm,
            pinv,
            l_rows,
            l_vals,
            u_rows,
            u_vals,
            u_diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.n
            + self.l_rows.iter().map(Vec::len).sum::<usize>()
            + self.u_rows.iter().map(Vec::len).sum::<usize>()
    }

    /// Solves `A x = b` with forward and backward substitution.
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            y[self.pinv[new]] = b[old];
        }
        for c in 0..self.n {
            let yc = y[c];
            if yc != ZERO {
                for (&r, l) in self.l_rows[c].iter().zip(&self.l_vals[c]) {
                    y[r] -= l * yc;
                }
            }
        }
        for c in (0..self.n).rev() {
            y[c] /= self.u_diag[c];
            let yc = y[c];
            if yc != ZERO {
                for (&r, u) in self.u_rows[c].iter().zip(&self.u_vals[c]) {
                    y[r] -= u * yc;
                }
            }
        }
        let mut x = vec![ZERO; self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}
