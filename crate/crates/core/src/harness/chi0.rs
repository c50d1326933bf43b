//! Independent-particle polarizability `χ₀(iω)` applied to a perturbation.
//!
//! For every occupied state the shifted system
//! `(H − ε_i − iω) u_i = −Q(ψ_i ⊙ g)` is solved on the unoccupied
//! complement and `χ₀ g = 2 Re Σ_i ψ_i ⊙ u_i`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::contour::{build_contour, SpectralBounds};
use crate::error::{Error, Result};
use crate::lanczos::{multishift_solve, LanczosConfig};
use crate::linalg::{norm, DenseMatrix, C64, ZERO};
use crate::pencil::{project_out_rhs, HermitianOperator, IndefiniteSplit, Pencil, Storage};
use crate::pole::PoleSolver;
use crate::subsolve::SubSolveConfig;

/// Occupied-state data for one `χ₀` application.
#[derive(Debug, Clone)]
pub struct Chi0Problem {
    pub n_e: usize,
    /// Energy of the highest occupied state before shifting.
    pub fermi_level: f64,
    /// Occupied energies, ascending, shifted so the last is 0.
    pub energies: Vec<f64>,
    /// Occupied states as columns, real and orthonormal.
    pub occupied: DMatrix<f64>,
    /// Unoccupied energies (shifted), ascending.
    pub unoccupied_energies: Vec<f64>,
    pub unoccupied: DMatrix<f64>,
    pub g: Vec<f64>,
    pub omegas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum Chi0Method {
    /// Pole expansion on the unoccupied interval; one basis per occupied
    /// state, reused for every frequency.
    Pole { poles: usize, config: SubSolveConfig },
    /// Multi-shift Lanczos with the occupied space projected out.
    Lanczos { tol: f64, config: LanczosConfig },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Chi0Result {
    pub omegas: Vec<f64>,
    /// `χ₀(iω) g` per frequency.
    pub responses: Vec<Vec<f64>>,
    /// `max |ψ_k* u_i| / ‖u_i‖` over occupied `k`, states `i` and frequencies.
    pub orthogonality: f64,
    /// Pole systems solved (pole mode) or Lanczos iterations (Lanczos mode).
    pub work: u64,
    pub max_residual: f64,
}

fn check_real_standard(pencil: &Pencil) -> Result<()> {
    if !pencil.has_identity_overlap() || !pencil.is_real() {
        return Err(Error::Invalid("the χ₀ demo needs a real pencil with S = I".into()));
    }
    Ok(())
}

fn real_dense(pencil: &Pencil) -> DMatrix<f64> {
    pencil.h().to_dense().map(|v| v.re)
}

fn to_complex_matrix(a: &DMatrix<f64>) -> DenseMatrix {
    a.map(|v| C64::new(v, 0.0))
}

/// `H − c I` as a pencil.
fn shifted_pencil(pencil: &Pencil, c: f64) -> Result<Pencil> {
    let h = match pencil.shifted_matrix(C64::new(c, 0.0)) {
        Storage::Dense(a) => HermitianOperator::dense(a)?,
        Storage::Sparse(a) => HermitianOperator::sparse(a)?,
    };
    Ok(Pencil::standard(h))
}

impl Chi0Problem {
    /// Occupied states from a dense diagonalization of `H`.
    pub fn from_pencil(pencil: &Pencil, n_e: usize, g: Vec<f64>, omegas: Vec<f64>) -> Result<Self> {
        check_real_standard(pencil)?;
        let n = pencil.dim();
        if n_e == 0 || n_e >= n {
            return Err(Error::Invalid(format!("need 0 < N_e < n, got N_e = {n_e}, n = {n}")));
        }
        if g.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: g.len() });
        }
        let eig = SymmetricEigen::new(real_dense(pencil));
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let lambdas: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let fermi = lambdas[n_e - 1];
        let gap = lambdas[n_e] - fermi;
        let scale = lambdas.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        if gap <= 1e-10 * scale {
            return Err(Error::Invalid(format!("no gap above the {n_e} occupied states (gap {gap:e})")));
        }
        let cols = |range: std::ops::Range<usize>| {
            DMatrix::from_fn(n, range.len(), |r, c| eig.eigenvectors[(r, order[range.start + c])])
        };
        let problem = Self {
            n_e,
            fermi_level: fermi,
            energies: lambdas[..n_e].iter().map(|l| l - fermi).collect(),
            occupied: cols(0..n_e),
            unoccupied_energies: lambdas[n_e..].iter().map(|l| l - fermi).collect(),
            unoccupied: cols(n_e..n),
            g,
            omegas,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn dim(&self) -> usize {
        self.occupied.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let gram = self.occupied.transpose() * &self.occupied;
        let defect = (gram - DMatrix::identity(self.n_e, self.n_e)).amax();
        if defect > 1e-8 {
            return Err(Error::Invalid(format!("occupied states not orthonormal (defect {defect:e})")));
        }
        if self.energies.iter().any(|&e| e > 0.0) {
            return Err(Error::Invalid("occupied energies must be ≤ 0 after shifting".into()));
        }
        if self.omegas.iter().any(|w| !w.is_finite()) {
            return Err(Error::Invalid("frequencies must be finite reals".into()));
        }
        Ok(())
    }

    /// Occupied/unoccupied split of the shifted operator `H − ε_{N_e}`.
    pub fn split(&self) -> IndefiniteSplit {
        IndefiniteSplit {
            m_pos: self.unoccupied_energies.len(),
            lambda_plus: self.unoccupied_energies.clone(),
            lambda_minus: self.energies.clone(),
            psi_plus: to_complex_matrix(&self.unoccupied),
            psi_minus: to_complex_matrix(&self.occupied),
        }
    }

    /// Unoccupied spectral interval of the shifted operator.
    pub fn unoccupied_bounds(&self) -> Result<SpectralBounds> {
        let lo = self.unoccupied_energies[0];
        let hi = *self.unoccupied_energies.last().expect("non-empty");
        SpectralBounds::new(lo, hi)
    }

    fn source(&self, pencil: &Pencil, i: usize) -> Result<Vec<C64>> {
        let psi_minus = to_complex_matrix(&self.occupied);
        let f: Vec<C64> = self
            .occupied
            .column(i)
            .iter()
            .zip(&self.g)
            .map(|(p, g)| C64::new(-p * g, 0.0))
            .collect();
        project_out_rhs(&psi_minus, pencil, &f)
    }

    fn occupied_overlap(&self, u: &[C64]) -> f64 {
        let nu = norm(u);
        if nu == 0.0 {
            return 0.0;
        }
        (0..self.n_e)
            .map(|k| {
                self.occupied
                    .column(k)
                    .iter()
                    .zip(u)
                    .map(|(p, x)| x * *p)
                    .sum::<C64>()
                    .norm()
            })
            .fold(0.0, f64::max)
            / nu
    }
}

/// `χ₀(iω) g` for every frequency of the problem.
pub fn apply_chi0(problem: &Chi0Problem, pencil: &Pencil, method: &Chi0Method) -> Result<Chi0Result> {
    check_real_standard(pencil)?;
    problem.validate()?;
    if pencil.dim() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            got: pencil.dim(),
        });
    }
    let shifted = shifted_pencil(pencil, problem.fermi_level)?;
    let n = problem.dim();
    let nw = problem.omegas.len();
    let mut responses = vec![vec![0.0; n]; nw];
    let mut orthogonality: f64 = 0.0;
    let mut max_residual: f64 = 0.0;
    let mut work = 0;

    let mut accumulate = |i: usize, l: usize, u: &[C64], responses: &mut Vec<Vec<f64>>| {
        orthogonality = orthogonality.max(problem.occupied_overlap(u));
        for ((r, p), x) in responses[l].iter_mut().zip(problem.occupied.column(i).iter()).zip(u) {
            *r += 2.0 * p * x.re;
        }
    };

    match method {
        Chi0Method::Pole { poles, config } => {
            let contour = build_contour(problem.unoccupied_bounds()?, *poles)?;
            let split = problem.split();
            let solver = PoleSolver::new(config.clone());
            for i in 0..problem.n_e {
                let b = problem.source(&shifted, i)?;
                if norm(&b) == 0.0 {
                    continue;
                }
                let basis = solver.compute_indefinite_basis(&shifted, &contour, &split, &b, true)?;
                for (l, &w) in problem.omegas.iter().enumerate() {
                    let z = C64::new(problem.energies[i], w);
                    let u = solver.combine(&basis, z)?;
                    max_residual = max_residual.max(shifted.relative_residual(z, &u, &b));
                    accumulate(i, l, &u, &mut responses);
                }
            }
            work = solver.counters().basis_solves;
        }
        Chi0Method::Lanczos { tol, config } => {
            let psi_minus = to_complex_matrix(&problem.occupied);
            for i in 0..problem.n_e {
                let b = problem.source(&shifted, i)?;
                if norm(&b) == 0.0 {
                    continue;
                }
                let shifts: Vec<C64> = problem.omegas.iter().map(|&w| C64::new(problem.energies[i], w)).collect();
                let r = multishift_solve(&shifted, &b, &shifts, &[*tol], config, Some(&psi_minus))?;
                work += r.iterations as u64;
                max_residual = max_residual.max(r.max_residual());
                for (l, u) in r.solutions.iter().enumerate() {
                    accumulate(i, l, u, &mut responses);
                }
            }
        }
    }
    Ok(Chi0Result {
        omegas: problem.omegas.clone(),
        responses,
        orthogonality,
        work,
        max_residual,
    })
}

/// Sum-over-states reference:
/// `χ₀ g = 2 Re Σ_{i ≤ N_e} Σ_{j > N_e} ψ_i ψ_j ⟨ψ_j, ψ_i ⊙ g⟩ / (ε_i − ε_j + iω)`.
pub fn chi0_sum_over_states(problem: &Chi0Problem, omega: f64) -> Vec<f64> {
    let n = problem.dim();
    let mut out = vec![0.0; n];
    let mut u = vec![ZERO; n];
    for i in 0..problem.n_e {
        let psi_i = problem.occupied.column(i);
        u.iter_mut().for_each(|v| *v = ZERO);
        for (j, &ej) in problem.unoccupied_energies.iter().enumerate() {
            let psi_j = problem.unoccupied.column(j);
            let overlap: f64 = psi_j.iter().zip(psi_i.iter()).zip(&problem.g).map(|((a, b), g)| a * b * g).sum();
            let c = overlap / C64::new(problem.energies[i] - ej, omega);
            for (x, p) in u.iter_mut().zip(psi_j.iter()) {
                *x += c * *p;
            }
        }
        for ((o, p), x) in out.iter_mut().zip(psi_i.iter()).zip(&u) {
            *o += 2.0 * p * x.re;
        }
    }
    out
}
