//! Solvers for fixed-shift systems `(H − ξ S) h = b`.

mod dense_lu;
mod krylov;
mod precond;

pub use dense_lu::DenseLu;
pub(crate) use krylov::givens;
pub use krylov::{gmres, sqmr, Apply};
pub use precond::{laplacian_shift_preconditioner, GridDescriptor, Preconditioner, ShiftedLaplacianPreconditioner};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};
use crate::pencil::{Pencil, Storage};
use crate::sparse::SparseLu;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubSolveMethod {
    Direct,
    IterativeGeneral,
    IterativeSymmetric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PreconditionerSpec {
    None,
    /// `(−½Δ − ξ)⁻¹` on the given grid for the pole `ξ`.
    ShiftedLaplacian(GridDescriptor),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubSolveConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub method: SubSolveMethod,
    pub restart: usize,
    pub preconditioner: PreconditionerSpec,
}

impl Default for SubSolveConfig {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 500,
            method: SubSolveMethod::Direct,
            restart: 0,
            preconditioner: PreconditionerSpec::None,
        }
    }
}

impl SubSolveConfig {
    pub fn direct() -> Self {
        Self::default()
    }

    pub fn iterative(method: SubSolveMethod, tol: f64) -> Self {
        Self {
            tol,
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Invalid(format!("sub-solve tolerance {} must be positive", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Invalid("sub-solve max_iter must be at least 1".into()));
        }
        Ok(())
    }

    /// The symmetric method needs `H − ξS` complex symmetric, i.e. a real
    /// pencil; otherwise GMRES is used.
    pub fn effective_method(&self, pencil: &Pencil) -> SubSolveMethod {
        match self.method {
            SubSolveMethod::IterativeSymmetric if !pencil.is_real() => SubSolveMethod::IterativeGeneral,
            m => m,
        }
    }

    /// Preconditioner for the pole `ξ`, if one is configured.
    pub fn build_preconditioner(&self, n: usize, xi: C64) -> Result<Option<ShiftedLaplacianPreconditioner>> {
        match &self.preconditioner {
            PreconditionerSpec::None => Ok(None),
            PreconditionerSpec::ShiftedLaplacian(grid) => {
                if grid.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: grid.len() });
                }
                laplacian_shift_preconditioner(grid, -xi).map(Some)
            }
        }
    }
}

/// Outcome of an iterative solve. A run that misses the tolerance is
/// returned with `converged = false` and its best iterate.
#[derive(Debug, Clone)]
pub struct IterativeResult {
    pub x: Vec<C64>,
    pub iterations: usize,
    /// True relative residual `‖b − A x‖₂ / ‖b‖₂` of the returned iterate.
    pub residual: f64,
    pub converged: bool,
    /// Per-iteration residual estimates.
    pub history: Vec<f64>,
}

impl IterativeResult {
    fn converged_zero(n: usize) -> Self {
        Self {
            x: vec![ZERO; n],
            iterations: 0,
            residual: 0.0,
            converged: true,
            history: Vec::new(),
        }
    }
}

pub fn iterative_solve(
    op: &Apply,
    b: &[C64],
    config: &SubSolveConfig,
    precond: Option<&dyn Preconditioner>,
) -> Result<IterativeResult> {
    config.validate()?;
    match config.method {
        SubSolveMethod::Direct => Err(Error::Invalid("iterative_solve called with the direct method".into())),
        SubSolveMethod::IterativeGeneral => Ok(gmres(op, precond, b, config.tol, config.max_iter, config.restart)),
        SubSolveMethod::IterativeSymmetric => Ok(sqmr(op, precond, b, config.tol, config.max_iter)),
    }
}

/// Iterative solve of `(H − ξ S) h = b` with the configured preconditioner.
pub fn iterative_shifted_solve(pencil: &Pencil, xi: C64, b: &[C64], config: &SubSolveConfig) -> Result<IterativeResult> {
    let pre = config.build_preconditioner(pencil.dim(), xi)?;
    let op = |x: &[C64], y: &mut [C64]| pencil.apply_shifted(xi, x, y);
    let cfg = SubSolveConfig {
        method: config.effective_method(pencil),
        ..config.clone()
    };
    iterative_solve(&op, b, &cfg, pre.as_ref().map(|p| p as &dyn Preconditioner))
}

#[derive(Debug, Clone)]
enum Factor {
    Dense(DenseLu),
    Sparse(SparseLu),
}

/// Reusable LU factorization of `H − ξ S`.
#[derive(Debug, Clone)]
pub struct ShiftedFactorization {
    shift: C64,
    factor: Factor,
}

impl ShiftedFactorization {
    pub fn shift(&self) -> C64 {
        self.shift
    }

    pub fn dim(&self) -> usize {
        match &self.factor {
            Factor::Dense(f) => f.dim(),
            Factor::Sparse(f) => f.dim(),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.factor, Factor::Sparse(_))
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        match &self.factor {
            Factor::Dense(f) => f.solve(b),
            Factor::Sparse(f) => f.solve(b),
        }
    }
}

pub fn direct_factor(pencil: &Pencil, xi: C64) -> Result<ShiftedFactorization> {
    let factor = match pencil.shifted_matrix(xi) {
        Storage::Dense(a) => Factor::Dense(DenseLu::factor(a)?),
        Storage::Sparse(a) => Factor::Sparse(SparseLu::factor(&a)?),
    };
    Ok(ShiftedFactorization { shift: xi, factor })
}
