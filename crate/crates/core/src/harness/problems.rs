//! Test-problem generators: periodic grid Hamiltonians, synthetic pencils
//! with a known eigendecomposition, and a sparse pencil with `S ≠ I`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, C64};
use crate::pencil::{EigenDecomposition, HermitianOperator, IndefiniteSplit, Pencil};
use crate::sparse::CsrMatrix;
use crate::subsolve::GridDescriptor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianWell {
    pub center: Vec<f64>,
    /// Negative for an attractive well.
    pub depth: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Potential {
    Zero,
    Constant { value: f64 },
    Wells { wells: Vec<GaussianWell> },
    /// `count` wells with centers drawn uniformly from the cell.
    RandomWells { count: usize, depth: f64, width: f64 },
    Values { values: Vec<f64> },
}

/// Description of a periodic grid problem `−½Δ + V`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub shape: Vec<usize>,
    /// Period length along the first axis; the grid spacing is shared, so
    /// the other axes have period `shape[a] · length / shape[0]`.
    pub length: f64,
    pub potential: Potential,
    #[serde(default)]
    pub seed: u64,
}

impl GridSpec {
    pub fn new(shape: Vec<usize>, length: f64, potential: Potential) -> Self {
        Self {
            shape,
            length,
            potential,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// `−½Δ + V` with periodic second-order differences.
#[derive(Debug, Clone)]
pub struct GridHamiltonian {
    pub grid: GridDescriptor,
    pub length: f64,
    pub potential: Vec<f64>,
    pub operator: CsrMatrix,
}

impl GridHamiltonian {
    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    pub fn to_pencil(&self) -> Result<Pencil> {
        Ok(Pencil::standard(HermitianOperator::sparse(self.operator.clone())?))
    }
}

fn periodic_distance2(a: &[f64], b: &[f64], periods: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(periods)
        .map(|((x, y), &length)| {
            let d = (x - y).rem_euclid(length);
            let d = d.min(length - d);
            d * d
        })
        .sum()
}

pub fn gen_grid_hamiltonian(spec: &GridSpec) -> Result<GridHamiltonian> {
    if !(spec.length > 0.0) {
        return Err(Error::Invalid(format!("period length {} must be positive", spec.length)));
    }
    if spec.shape.is_empty() || spec.shape.contains(&0) {
        return Err(Error::Invalid(format!("grid shape {:?} must be non-empty and positive", spec.shape)));
    }
    let h = spec.length / spec.shape[0] as f64;
    let periods: Vec<f64> = spec.shape.iter().map(|&m| m as f64 * h).collect();
    let grid = GridDescriptor::new(spec.shape.clone(), h)?;
    let n = grid.len();
    let dim = spec.shape.len();
    let coords = |i: usize| -> Vec<f64> {
        match spec.shape.as_slice() {
            [_] => vec![i as f64 * h],
            [_, n1] => vec![(i / n1) as f64 * h, (i % n1) as f64 * h],
            _ => unreachable!(),
        }
    };
    let wells_potential = |wells: &[GaussianWell]| -> Result<Vec<f64>> {
        if wells.iter().any(|w| w.center.len() != dim || !(w.width > 0.0)) {
            return Err(Error::Invalid("well centers must match the grid dimension and widths be positive".into()));
        }
        Ok((0..n)
            .map(|i| {
                let x = coords(i);
                wells
                    .iter()
                    .map(|w| w.depth * (-periodic_distance2(&x, &w.center, &periods) / (2.0 * w.width * w.width)).exp())
                    .sum()
            })
            .collect())
    };
    let potential = match &spec.potential {
        Potential::Zero => vec![0.0; n],
        Potential::Constant { value } => vec![*value; n],
        Potential::Wells { wells } => wells_potential(wells)?,
        Potential::RandomWells { count, depth, width } => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let wells: Vec<GaussianWell> = (0..*count)
                .map(|_| GaussianWell {
                    center: periods.iter().map(|p| rng.random::<f64>() * p).collect(),
                    depth: *depth,
                    width: *width,
                })
                .collect();
            wells_potential(&wells)?
        }
        Potential::Values { values } => {
            if values.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: values.len() });
            }
            values.clone()
        }
    };
    let h2 = h * h;
    let mut t = Vec::with_capacity(n * (2 * dim + 1));
    let off = C64::new(-0.5 / h2, 0.0);
    for (i, &v) in potential.iter().enumerate() {
        t.push((i, i, C64::new(dim as f64 / h2 + v, 0.0)));
        match spec.shape.as_slice() {
            [m] => {
                t.push((i, (i + 1) % m, off));
                t.push((i, (i + m - 1) % m, off));
            }
            [m0, m1] => {
                let (r, c) = (i / m1, i % m1);
                t.push((i, r * m1 + (c + 1) % m1, off));
                t.push((i, r * m1 + (c + m1 - 1) % m1, off));
                t.push((i, ((r + 1) % m0) * m1 + c, off));
                t.push((i, ((r + m0 - 1) % m0) * m1 + c, off));
            }
            _ => unreachable!(),
        }
    }
    let operator = CsrMatrix::from_triplets(n, &t)?;
    Ok(GridHamiltonian {
        grid,
        length: spec.length,
        potential,
        operator,
    })
}

/// Options for [`RandomPencil::generate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomPencil {
    pub n: usize,
    pub n_negative: usize,
    /// Ratio of largest to smallest positive eigenvalue.
    pub condition: f64,
    pub seed: u64,
    /// Draw complex Hermitian `H` and `S`.
    pub complex: bool,
    /// Use `S = I`.
    pub identity_overlap: bool,
}

/// A synthetic pencil together with its exact eigendecomposition.
#[derive(Debug, Clone)]
pub struct SyntheticPencil {
    pub pencil: Pencil,
    pub eig: EigenDecomposition,
    pub split: IndefiniteSplit,
}

impl RandomPencil {
    pub fn new(n: usize, n_negative: usize, condition: f64, seed: u64) -> Self {
        Self {
            n,
            n_negative,
            condition,
            seed,
            complex: false,
            identity_overlap: false,
        }
    }

    /// Positive eigenvalues log-spaced in `[1, condition]`; negative ones are
    /// log-spaced in `[−condition, −1]`.
    pub fn spectrum(&self) -> Vec<f64> {
        let logspace = |count: usize| -> Vec<f64> {
            (0..count)
                .map(|i| {
                    let t = if count > 1 { i as f64 / (count - 1) as f64 } else { 0.0 };
                    self.condition.powf(1.0 - t)
                })
                .collect()
        };
        let mut l = logspace(self.n - self.n_negative);
        l.extend(logspace(self.n_negative).into_iter().rev().map(|v| -v));
        l
    }

    /// `H = S Ψ Λ Ψ* S` with `Ψ = R⁻¹ Q`, so `Ψ* S Ψ = I` and `H Ψ = S Ψ Λ`.
    pub fn generate(&self) -> Result<SyntheticPencil> {
        if self.n == 0 || self.n_negative >= self.n {
            return Err(Error::Invalid(format!(
                "need 0 <= n_negative < n, got n = {}, n_negative = {}",
                self.n, self.n_negative
            )));
        }
        if !(self.condition >= 1.0) {
            return Err(Error::Invalid(format!("condition {} must be at least 1", self.condition)));
        }
        let n = self.n;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let complex = self.complex;
        let mut gauss = |_: usize, _: usize| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = if complex { StandardNormal.sample(&mut rng) } else { 0.0 };
            C64::new(re, im)
        };
        let q = DenseMatrix::from_fn(n, n, &mut gauss).qr().q();
        let s = if self.identity_overlap {
            None
        } else {
            let b = DenseMatrix::from_fn(n, n, &mut gauss) * C64::new(0.5 / (n as f64).sqrt(), 0.0);
            let s = b.adjoint() * &b + DenseMatrix::identity(n, n);
            Some((&s + s.adjoint()) * C64::new(0.5, 0.0))
        };
        let lambdas = self.spectrum();
        let (psi, h) = match &s {
            Some(s) => {
                let sop = HermitianOperator::dense(s.clone())?;
                let r = crate::pencil::cholesky(&sop)?;
                let psi = r.inverse_dense() * &q;
                let sp = s * &psi;
                let lam = DenseMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, lambdas.iter().map(|&l| C64::new(l, 0.0))));
                let h = &sp * lam * sp.adjoint();
                (psi, h)
            }
            None => {
                let lam = DenseMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, lambdas.iter().map(|&l| C64::new(l, 0.0))));
                let h = &q * lam * q.adjoint();
                (q.clone(), h)
            }
        };
        let mut h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
        if !complex {
            h = h.map(|v| C64::new(v.re, 0.0));
        }
        let s = s.map(|s| if complex { s } else { s.map(|v| C64::new(v.re, 0.0)) });
        let pencil = Pencil::new(HermitianOperator::dense(h)?, s.map(HermitianOperator::dense).transpose()?)?;
        let eig = EigenDecomposition { lambdas, psi };
        let split = eig.split();
        Ok(SyntheticPencil { pencil, eig, split })
    }
}

/// `(Pencil, IndefiniteSplit)` for a real synthetic pencil with `S ≠ I`.
pub fn gen_random_pencil(n: usize, n_negative: usize, condition: f64, seed: u64) -> Result<SyntheticPencil> {
    RandomPencil::new(n, n_negative, condition, seed).generate()
}

/// Sparse real pencil on a 2-D periodic grid: `H = −½Δ + V` with a random
/// positive potential, and `S` a diagonally dominant banded perturbation of
/// the identity.
pub fn gen_sparse_pencil(shape: [usize; 2], seed: u64) -> Result<Pencil> {
    let n = shape[0] * shape[1];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..n).map(|_| 0.5 + rng.random::<f64>()).collect();
    let spec = GridSpec::new(shape.to_vec(), shape[0] as f64, Potential::Values { values });
    let g = gen_grid_hamiltonian(&spec)?;
    let mut t = Vec::with_capacity(3 * n);
    for i in 0..n {
        t.push((i, i, C64::new(1.0, 0.0)));
        if i + 1 < n {
            let v = C64::new(0.2 * (2.0 * rng.random::<f64>() - 1.0), 0.0);
            t.push((i, i + 1, v));
            t.push((i + 1, i, v));
        }
    }
    let s = CsrMatrix::from_triplets(n, &t)?;
    Pencil::new(HermitianOperator::sparse(g.operator)?, Some(HermitianOperator::sparse(s)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pencil::dense_generalized_eig;
    use std::f64::consts::PI;

    #[test]
    fn free_particle_spectrum() {
        let g = gen_grid_hamiltonian(&GridSpec::new(vec![8], 4.0, Potential::Zero)).unwrap();
        let e = dense_generalized_eig(&g.to_pencil().unwrap()).unwrap();
        let h = 0.5;
        let mut want: Vec<f64> = (0..8).map(|j| (1.0 - (2.0 * PI * j as f64 / 8.0).cos()) / (h * h)).collect();
        want.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in e.lambdas.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn well_binds_a_state() {
        let spec = GridSpec::new(
            vec![64],
            20.0,
            Potential::Wells {
                wells: vec![GaussianWell {
                    center: vec![10.0],
                    depth: -5.0,
                    width: 1.0,
                }],
            },
        );
        let g = gen_grid_hamiltonian(&spec).unwrap();
        let e = dense_generalized_eig(&g.to_pencil().unwrap()).unwrap();
        assert!(*e.lambdas.last().unwrap() < 0.0);
    }

    #[test]
    fn seeded_generation_is_deterministic() {
        let spec = GridSpec::new(vec![6, 6], 6.0, Potential::RandomWells { count: 3, depth: -2.0, width: 0.8 }).with_seed(11);
        let a = gen_grid_hamiltonian(&spec).unwrap();
        let b = gen_grid_hamiltonian(&spec).unwrap();
        assert_eq!(a.operator, b.operator);
        assert!(a.to_pencil().unwrap().is_real());
        assert!(gen_grid_hamiltonian(&GridSpec::new(vec![0], 1.0, Potential::Zero)).is_err());
    }

    #[test]
    fn synthetic_pencil_has_the_chosen_spectrum() {
        let sp = gen_random_pencil(60, 5, 100.0, 3).unwrap();
        let e = dense_generalized_eig(&sp.pencil).unwrap();
        for (a, b) in e.lambdas.iter().zip(&sp.eig.lambdas) {
            assert!((a - b).abs() < 1e-8 * b.abs().max(1.0), "{a} vs {b}");
        }
        assert_eq!(sp.split.m_pos, 55);
        assert!(gen_random_pencil(4, 4, 10.0, 0).is_err());
    }

    #[test]
    fn sparse_pencil_is_definite() {
        let p = gen_sparse_pencil([5, 6], 1).unwrap();
        assert_eq!(p.dim(), 30);
        assert!(p.cholesky().is_some() && p.is_real());
    }
}
