use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;

/// A linear map approximating the inverse of a shifted operator.
pub trait Preconditioner: Send + Sync {
    fn apply(&self, x: &[C64]) -> Vec<C64>;
}

/// Periodic uniform grid in one or two dimensions, row-major ordering
/// (`index = i0 * shape[1] + i1` in 2-D).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDescriptor {
    pub shape: Vec<usize>,
    pub spacing: f64,
}

impl GridDescriptor {
    pub fn new(shape: Vec<usize>, spacing: f64) -> Result<Self> {
        if shape.is_empty() || shape.len() > 2 || shape.contains(&0) {
            return Err(Error::Invalid(format!("grid shape {shape:?} must have 1 or 2 positive axes")));
        }
        if !(spacing > 0.0) {
            return Err(Error::Invalid(format!("grid spacing {spacing} must be positive")));
        }
        Ok(Self { shape, spacing })
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Eigenvalues of `−½Δ` along one axis of `n` points:
    /// `(1 − cos(2πj/n)) / h²`.
    pub fn axis_eigenvalues(&self, n: usize) -> Vec<f64> {
        let h2 = self.spacing * self.spacing;
        (0..n).map(|j| (1.0 - (2.0 * PI * j as f64 / n as f64).cos()) / h2).collect()
    }

    /// Eigenvalues of `−½Δ` in the FFT mode order.
    pub fn laplacian_eigenvalues(&self) -> Vec<f64> {
        match self.shape.as_slice() {
            [n] => self.axis_eigenvalues(*n),
            [n0, n1] => {
                let (e0, e1) = (self.axis_eigenvalues(*n0), self.axis_eigenvalues(*n1));
                e0.iter().flat_map(|a| e1.iter().map(move |b| a + b)).collect()
            }
            _ => unreachable!("validated on construction"),
        }
    }
}

/// `(−½Δ + shift)⁻¹` applied exactly in the discrete Fourier basis.
pub struct ShiftedLaplacianPreconditioner {
    grid: GridDescriptor,
    inv_symbol: Vec<C64>,
    fwd: Vec<Arc<dyn Fft<f64>>>,
    inv: Vec<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for ShiftedLaplacianPreconditioner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ShiftedLaplacianPreconditioner").field("grid", &self.grid).finish()
    }
}

pub fn laplacian_shift_preconditioner(grid: &GridDescriptor, shift: C64) -> Result<ShiftedLaplacianPreconditioner> {
    let mu = grid.laplacian_eigenvalues();
    let scale = mu.iter().copied().fold(1.0, f64::max);
    let mut inv_symbol = Vec::with_capacity(mu.len());
    for (j, &m) in mu.iter().enumerate() {
        let d = m + shift;
        if d.norm() <= 1e-14 * scale {
            return Err(Error::SingularMode(j));
        }
        inv_symbol.push(1.0 / d);
    }
    let mut planner = FftPlanner::new();
    let fwd = grid.shape.iter().map(|&n| planner.plan_fft_forward(n)).collect();
    let inv = grid.shape.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
    Ok(ShiftedLaplacianPreconditioner {
        grid: grid.clone(),
        inv_symbol,
        fwd,
        inv,
    })
}

impl ShiftedLaplacianPreconditioner {
    pub fn grid(&self) -> &GridDescriptor {
        &self.grid
    }

    fn transform(&self, data: &mut [C64], plans: &[Arc<dyn Fft<f64>>]) {
        match self.grid.shape.as_slice() {
            [_] => plans[0].process(data),
            [n0, n1] => {
                for row in data.chunks_mut(*n1) {
                    plans[1].process(row);
                }
                let mut col = vec![C64::new(0.0, 0.0); *n0];
                for c in 0..*n1 {
                    for r in 0..*n0 {
                        col[r] = data[r * n1 + c];
                    }
                    plans[0].process(&mut col);
                    for r in 0..*n0 {
                        data[r * n1 + c] = col[r];
                    }
                }
            }
            _ => unreachable!(),
        }
    }
}

impl Preconditioner for ShiftedLaplacianPreconditioner {
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = x.to_vec();
        self.transform(&mut y, &self.fwd);
        for (v, s) in y.iter_mut().zip(&self.inv_symbol) {
            *v *= s;
        }
        self.transform(&mut y, &self.inv);
        let norm = 1.0 / self.grid.len() as f64;
        for v in &mut y {
            *v *= norm;
        }
        y
    }
}
