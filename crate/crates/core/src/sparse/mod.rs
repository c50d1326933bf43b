//! Compressed sparse row storage and the sparse direct factorizations.

mod cholesky;
mod lu;
mod ordering;

pub use cholesky::SparseCholesky;
pub use lu::SparseLu;
pub use ordering::minimum_degree;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, C64, ZERO};

/// Square complex matrix in CSR form with sorted, duplicate-free rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    /// Assembles from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, C64)]) -> Result<Self> {
        let mut rows: Vec<BTreeMap<usize, C64>> = vec![BTreeMap::new(); n];
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::Invalid(format!("entry ({i}, {j}) outside a {n}x{n} matrix")));
            }
            *rows[i].entry(j).or_insert(ZERO) += v;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (j, v) in row {
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            n,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![C64::new(1.0, 0.0); n],
        }
    }

    pub fn from_dense(a: &DenseMatrix) -> Self {
        let n = a.nrows();
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if a[(i, j)] != ZERO {
                    t.push((i, j, a[(i, j)]));
                }
            }
        }
        Self::from_triplets(n, &t).expect("indices in range")
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[C64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => ZERO,
        }
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.n).flat_map(move |i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).map(move |(&j, &x)| (i, j, x))
        })
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, v)| v * x[j]).sum();
        }
    }

    /// Plain transpose (no conjugation). Its rows are the columns of `self`.
    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.n + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for i in 0..self.n {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![ZERO; self.nnz()];
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let p = next[j];
                col_idx[p] = i;
                values[p] = v;
                next[j] += 1;
            }
        }
        Self {
            n: self.n,
            row_ptr: counts,
            col_idx,
            values,
        }
    }

    /// `a·self + b·other` over the union pattern.
    pub fn linear_combination(&self, a: C64, other: &CsrMatrix, b: C64) -> Result<Self> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..self.n {
            let (c1, v1) = self.row(i);
            let (c2, v2) = other.row(i);
            let (mut p, mut q) = (0, 0);
            while p < c1.len() || q < c2.len() {
                let j1 = c1.get(p).copied().unwrap_or(usize::MAX);
                let j2 = c2.get(q).copied().unwrap_or(usize::MAX);
                if j1 == j2 {
                    col_idx.push(j1);
                    values.push(a * v1[p] + b * v2[q]);
                    p += 1;
                    q += 1;
                } else if j1 < j2 {
                    col_idx.push(j1);
                    values.push(a * v1[p]);
                    p += 1;
                } else {
                    col_idx.push(j2);
                    values.push(b * v2[q]);
                    q += 1;
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            n: self.n,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Symmetrically permuted copy `B[i][j] = A[perm[i]][perm[j]]`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> Self {
        let mut inv = vec![0; self.n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let t: Vec<_> = self.triplets().map(|(i, j, v)| (inv[i], inv[j], v)).collect();
        Self::from_triplets(self.n, &t).expect("permutation keeps indices in range")
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.triplets() {
            d[(i, j)] = v;
        }
        d
    }

    /// Largest `|a_ij − conj(a_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        self.triplets()
            .map(|(i, j, v)| (v - self.get(j, i).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    /// Adjacency lists of the symmetrized off-diagonal pattern.
    pub(crate) fn symmetric_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for (i, j, _) in self.triplets() {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }
}

/// Depth-first reach shared by the sparse factorizations: collects, in
/// topological order, every node reachable from `seeds` where `children(v)`
/// lists the out-edges of `v`.
pub(crate) fn reach<'a, F>(
    seeds: impl Iterator<Item = usize>,
    children: F,
    marks: &mut [usize],
    stamp: usize,
    out: &mut Vec<usize>,
) where
    F: Fn(usize) -> &'a [usize],
{
    out.clear();
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for s in seeds {
        if marks[s] == stamp {
            continue;
        }
        marks[s] = stamp;
        stack.push((s, 0));
        while let Some(&mut (node, ref mut pos)) = stack.last_mut() {
            let kids = children(node);
            if *pos < kids.len() {
                let c = kids[*pos];
                *pos += 1;
                if marks[c] != stamp {
                    marks[c] = stamp;
                    stack.push((c, 0));
                }
            } else {
                out.push(node);
                stack.pop();
            }
        }
    }
    out.reverse();
}
