//! Pole-expansion solver: solve `(H − ξ_k S) h̃_k = b` once per pole, then
//! answer any shift `z` by combination.

mod basis;

pub use basis::{rhs_fingerprint, BasisDocument, BasisStorage, PoleBasis};

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::PoleContour;
use crate::error::{Error, Result};
use crate::linalg::{conj, is_real, C64};
use crate::pencil::{negative_leakage, project_out, rhs_leakage, IndefiniteSplit, Pencil};
use crate::subsolve::{direct_factor, iterative_shifted_solve, ShiftedFactorization, SubSolveConfig, SubSolveMethod};

/// Right-hand sides whose dual-norm leakage into the negative eigenspace
/// exceeds this are rejected by [`PoleSolver::solve_indefinite`].
pub const RHS_LEAKAGE_TOL: f64 = 1e-8;

#[derive(Debug, Default)]
struct Counters {
    basis_solves: AtomicU64,
    factorizations: AtomicU64,
    substitutions: AtomicU64,
    iterative_iterations: AtomicU64,
    combine_calls: AtomicU64,
    combine_ops: AtomicU64,
}

/// Snapshot of the work counters of a [`PoleSolver`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterSnapshot {
    /// Pole systems solved (one per computed `h̃_k`).
    pub basis_solves: u64,
    pub factorizations: u64,
    /// Forward/backward substitution pairs with a stored factorization.
    pub substitutions: u64,
    pub iterative_iterations: u64,
    pub combine_calls: u64,
    /// Vector element operations spent in combination (`P · n` per call).
    pub combine_ops: u64,
}

/// Per-solve diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub poles: usize,
    pub shifts: Vec<C64>,
    /// `r_l = ‖b − (H − z_l S) ũ_l‖₂ / ‖b‖₂`, recomputed from the solutions.
    pub shift_residuals: Vec<f64>,
    /// Relative residual of every stored pole solution.
    pub pole_residuals: Vec<f64>,
    /// Stored poles whose sub-solve missed its tolerance.
    pub flagged_poles: Vec<usize>,
    pub storage: BasisStorage,
    pub basis_seconds: f64,
    pub combine_seconds: f64,
    /// `max |Ψ₋* S ũ_l| / ‖ũ_l‖_S` per shift (indefinite mode only).
    pub leakage: Vec<f64>,
}

impl SolveReport {
    pub fn max_shift_residual(&self) -> f64 {
        self.shift_residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Solutions for several right-hand sides sharing one set of factorizations.
#[derive(Debug, Clone)]
pub struct MultiRhsSolution {
    /// `solutions[r][l]` for right-hand side `r` and shift `l`.
    pub solutions: Vec<Vec<Vec<C64>>>,
    pub bases: Vec<PoleBasis>,
}

/// Upper-pole factorization and, for complex pencils, its partner.
struct PoleFactors {
    upper: ShiftedFactorization,
    lower: Option<ShiftedFactorization>,
}

struct PoleSolution {
    upper: Vec<C64>,
    lower: Option<Vec<C64>>,
    iterations: usize,
    converged: bool,
}

/// Pole-expansion solver with a configurable worker pool and work counters.
#[derive(Debug, Clone)]
pub struct PoleSolver {
    config: SubSolveConfig,
    threads: usize,
    counters: Arc<Counters>,
}

impl PoleSolver {
    pub fn new(config: SubSolveConfig) -> Self {
        Self {
            config,
            threads: 0,
            counters: Arc::default(),
        }
    }

    /// Worker pool width for pole solves; 0 uses the global pool.
    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    pub fn config(&self) -> &SubSolveConfig {
        &self.config
    }

    pub fn counters(&self) -> CounterSnapshot {
        let c = &self.counters;
        CounterSnapshot {
            basis_solves: c.basis_solves.load(Ordering::Relaxed),
            factorizations: c.factorizations.load(Ordering::Relaxed),
            substitutions: c.substitutions.load(Ordering::Relaxed),
            iterative_iterations: c.iterative_iterations.load(Ordering::Relaxed),
            combine_calls: c.combine_calls.load(Ordering::Relaxed),
            combine_ops: c.combine_ops.load(Ordering::Relaxed),
        }
    }

    pub fn reset_counters(&self) {
        let c = &self.counters;
        for a in [
            &c.basis_solves,
            &c.factorizations,
            &c.substitutions,
            &c.iterative_iterations,
            &c.combine_calls,
            &c.combine_ops,
        ] {
            a.store(0, Ordering::Relaxed);
        }
    }

    fn bump(counter: &AtomicU64, by: u64) {
        counter.fetch_add(by, Ordering::Relaxed);
    }

    fn parallel<T, F>(&self, count: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync + Send,
    {
        if self.threads == 0 {
            return (0..count).into_par_iter().map(&f).collect();
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
        pool.install(|| (0..count).into_par_iter().map(&f).collect())
    }

    fn storage_for(pencil: &Pencil, b: &[C64]) -> BasisStorage {
        if pencil.is_real() && is_real(b) {
            BasisStorage::Conjugate
        } else {
            BasisStorage::Full
        }
    }

    fn solver_label(&self, pencil: &Pencil) -> String {
        match self.config.effective_method(pencil) {
            SubSolveMethod::Direct => "direct-lu".into(),
            SubSolveMethod::IterativeGeneral => "gmres".into(),
            SubSolveMethod::IterativeSymmetric => "sqmr".into(),
        }
    }

    fn check_inputs(&self, pencil: &Pencil, b: &[C64]) -> Result<()> {
        self.config.validate()?;
        if b.len() != pencil.dim() {
            return Err(Error::DimensionMismatch {
                expected: pencil.dim(),
                got: b.len(),
            });
        }
        Ok(())
    }

    fn factor_pole(&self, pencil: &Pencil, xi: C64, storage_full: bool) -> Result<PoleFactors> {
        let upper = direct_factor(pencil, xi)?;
        Self::bump(&self.counters.factorizations, 1);
        let lower = if storage_full && !pencil.is_real() {
            Self::bump(&self.counters.factorizations, 1);
            Some(direct_factor(pencil, xi.conj())?)
        } else {
            None
        };
        Ok(PoleFactors { upper, lower })
    }

    /// Pole solutions from stored factorizations. For a real pencil the
    /// lower pole is served by `(H − ξ̄ S)⁻¹ b = conj((H − ξ S)⁻¹ conj(b))`.
    fn substitute(&self, pencil: &Pencil, f: &PoleFactors, b: &[C64], storage: BasisStorage) -> PoleSolution {
        let upper = f.upper.solve(b);
        let mut solves = 1;
        let lower = match storage {
            BasisStorage::Conjugate => None,
            BasisStorage::Full => {
                solves += 1;
                Some(match &f.lower {
                    Some(low) => low.solve(b),
                    None => {
                        debug_assert!(pencil.is_real());
                        conj(&f.upper.solve(&conj(b)))
                    }
                })
            }
        };
        Self::bump(&self.counters.substitutions, solves);
        Self::bump(&self.counters.basis_solves, solves);
        PoleSolution {
            upper,
            lower,
            iterations: 0,
            converged: true,
        }
    }

    fn iterate(&self, pencil: &Pencil, xi: C64, b: &[C64], storage: BasisStorage) -> Result<PoleSolution> {
        let up = iterative_shifted_solve(pencil, xi, b, &self.config)?;
        let mut iterations = up.iterations;
        let mut converged = up.converged;
        let lower = match storage {
            BasisStorage::Conjugate => None,
            BasisStorage::Full => {
                let low = if pencil.is_real() {
                    let mut r = iterative_shifted_solve(pencil, xi, &conj(b), &self.config)?;
                    r.x = conj(&r.x);
                    r
                } else {
                    iterative_shifted_solve(pencil, xi.conj(), b, &self.config)?
                };
                iterations += low.iterations;
                converged &= low.converged;
                Some(low.x)
            }
        };
        let solves = if lower.is_some() { 2 } else { 1 };
        Self::bump(&self.counters.basis_solves, solves);
        Self::bump(&self.counters.iterative_iterations, iterations as u64);
        Ok(PoleSolution {
            upper: up.x,
            lower,
            iterations,
            converged,
        })
    }

    fn assemble(
        &self,
        pencil: &Pencil,
        contour: &PoleContour,
        b: &[C64],
        storage: BasisStorage,
        solutions: Vec<PoleSolution>,
    ) -> Result<PoleBasis> {
        let half = contour.poles() / 2;
        let mut vectors = Vec::with_capacity(contour.poles());
        let mut lowers = Vec::new();
        let mut converged = Vec::with_capacity(contour.poles());
        let mut iterations = Vec::with_capacity(contour.poles());
        for s in solutions {
            vectors.push(s.upper);
            converged.push(s.converged);
            iterations.push(s.iterations);
            if let Some(l) = s.lower {
                lowers.push(l);
            }
        }
        if storage == BasisStorage::Full {
            vectors.extend(lowers);
            converged.extend_from_within(..half);
            iterations.extend_from_within(..half);
        }
        let mut basis = PoleBasis {
            contour: contour.clone(),
            rhs_tag: rhs_fingerprint(b),
            storage,
            vectors,
            residual_norms: Vec::new(),
            converged,
            iterations,
            solver_used: self.solver_label(pencil),
        };
        basis.residual_norms = self.pole_residuals(pencil, &basis, b)?;
        Ok(basis)
    }

    fn pole_residuals(&self, pencil: &Pencil, basis: &PoleBasis, b: &[C64]) -> Result<Vec<f64>> {
        let nodes = basis.contour.nodes();
        self.parallel(basis.vectors.len(), |k| Ok(pencil.relative_residual(nodes[k], &basis.vectors[k], b)))
    }

    /// Solve every pole system for `b`.
    pub fn compute_basis(&self, pencil: &Pencil, contour: &PoleContour, b: &[C64]) -> Result<PoleBasis> {
        self.check_inputs(pencil, b)?;
        let storage = Self::storage_for(pencil, b);
        let full = storage == BasisStorage::Full;
        let upper: Vec<C64> = contour.upper_half().map(|(xi, _)| xi).collect();
        let solutions = match self.config.method {
            SubSolveMethod::Direct => self.parallel(upper.len(), |j| {
                let f = self.factor_pole(pencil, upper[j], full)?;
                Ok(self.substitute(pencil, &f, b, storage))
            })?,
            _ => self.parallel(upper.len(), |j| self.iterate(pencil, upper[j], b, storage))?,
        };
        self.assemble(pencil, contour, b, storage, solutions)
    }

    /// Combine a basis for one shift, counting the work.
    pub fn combine(&self, basis: &PoleBasis, z: C64) -> Result<Vec<C64>> {
        let u = basis.combine(z)?;
        Self::bump(&self.counters.combine_calls, 1);
        Self::bump(&self.counters.combine_ops, basis.combine_cost());
        Ok(u)
    }

    fn combine_all(&self, basis: &PoleBasis, shifts: &[C64]) -> Result<Vec<Vec<C64>>> {
        if let Some(z) = shifts.iter().find(|z| z.re > 0.0) {
            return Err(Error::InvalidShift(*z, "Re z > 0 lies outside the approximation region".into()));
        }
        shifts.iter().map(|&z| self.combine(basis, z)).collect()
    }

    #[allow(clippy::too_many_arguments)]
    fn report(
        &self,
        pencil: &Pencil,
        basis: &PoleBasis,
        b: &[C64],
        shifts: &[C64],
        solutions: &[Vec<C64>],
        basis_seconds: f64,
        combine_seconds: f64,
    ) -> Result<SolveReport> {
        let shift_residuals = self.parallel(shifts.len(), |l| Ok(pencil.relative_residual(shifts[l], &solutions[l], b)))?;
        Ok(SolveReport {
            poles: basis.contour.poles(),
            shifts: shifts.to_vec(),
            shift_residuals,
            pole_residuals: basis.residual_norms.clone(),
            flagged_poles: basis.flagged(),
            storage: basis.storage,
            basis_seconds,
            combine_seconds,
            leakage: Vec::new(),
        })
    }

    /// Basis once, combination per shift.
    pub fn solve_many(
        &self,
        pencil: &Pencil,
        contour: &PoleContour,
        b: &[C64],
        shifts: &[C64],
    ) -> Result<(Vec<Vec<C64>>, SolveReport, PoleBasis)> {
        let t0 = Instant::now();
        let basis = self.compute_basis(pencil, contour, b)?;
        let basis_seconds = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let solutions = self.combine_all(&basis, shifts)?;
        let combine_seconds = t1.elapsed().as_secs_f64();
        let report = self.report(pencil, &basis, b, shifts, &solutions, basis_seconds, combine_seconds)?;
        Ok((solutions, report, basis))
    }

    /// Several right-hand sides with direct sub-solves: each pole matrix is
    /// factored once. In low-memory mode one factorization is held at a time.
    pub fn solve_multi_rhs(
        &self,
        pencil: &Pencil,
        contour: &PoleContour,
        rhs: &[Vec<C64>],
        shifts: &[C64],
        low_memory: bool,
    ) -> Result<MultiRhsSolution> {
        if self.config.method != SubSolveMethod::Direct {
            return Err(Error::Invalid("multi-rhs reuse needs the direct method".into()));
        }
        for b in rhs {
            self.check_inputs(pencil, b)?;
        }
        let storages: Vec<BasisStorage> = rhs.iter().map(|b| Self::storage_for(pencil, b)).collect();
        let any_full = storages.contains(&BasisStorage::Full);
        let upper: Vec<C64> = contour.upper_half().map(|(xi, _)| xi).collect();
        let half = upper.len();

        // per_rhs[r][j]
        let mut per_rhs: Vec<Vec<Option<PoleSolution>>> = rhs.iter().map(|_| (0..half).map(|_| None).collect()).collect();
        if low_memory {
            for (j, &xi) in upper.iter().enumerate() {
                let f = self.factor_pole(pencil, xi, any_full)?;
                let sols = self.parallel(rhs.len(), |r| Ok(self.substitute(pencil, &f, &rhs[r], storages[r])))?;
                for (r, s) in sols.into_iter().enumerate() {
                    per_rhs[r][j] = Some(s);
                }
            }
        } else {
            let factors = self.parallel(half, |j| self.factor_pole(pencil, upper[j], any_full))?;
            for (r, b) in rhs.iter().enumerate() {
                let sols = self.parallel(half, |j| Ok(self.substitute(pencil, &factors[j], b, storages[r])))?;
                for (j, s) in sols.into_iter().enumerate() {
                    per_rhs[r][j] = Some(s);
                }
            }
        }

        let mut solutions = Vec::with_capacity(rhs.len());
        let mut bases = Vec::with_capacity(rhs.len());
        for ((b, sols), storage) in rhs.iter().zip(per_rhs).zip(storages) {
            let sols: Vec<PoleSolution> = sols.into_iter().map(|s| s.expect("every pole solved")).collect();
            let basis = self.assemble(pencil, contour, b, storage, sols)?;
            solutions.push(self.combine_all(&basis, shifts)?);
            bases.push(basis);
        }
        Ok(MultiRhsSolution { solutions, bases })
    }

    /// Basis for the positive part of an indefinite pencil. The right-hand
    /// side must satisfy `Ψ₋* b ≈ 0` (see
    /// [`project_out_rhs`](crate::pencil::project_out_rhs)); with
    /// `project_basis_vectors` every `h̃_k` is S-projected against `Ψ₋`.
    pub fn compute_indefinite_basis(
        &self,
        pencil: &Pencil,
        contour: &PoleContour,
        split: &IndefiniteSplit,
        b: &[C64],
        project_basis_vectors: bool,
    ) -> Result<PoleBasis> {
        self.check_inputs(pencil, b)?;
        let psi = &split.psi_minus;
        let leak = rhs_leakage(psi, pencil, b)?;
        if leak > RHS_LEAKAGE_TOL {
            return Err(Error::RhsLeakage(leak));
        }
        if split.lambda_plus.is_empty() {
            return Err(Error::NoPositiveSpectrum);
        }
        let (lo, hi) = split
            .lambda_plus
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, c), &l| (a.min(l), c.max(l)));
        let bounds = contour.bounds();
        let slack = 1e-10 * hi;
        if lo < bounds.lower() - slack || hi > bounds.upper() + slack {
            return Err(Error::Invalid(format!(
                "contour on [{}, {}] does not cover the positive spectrum [{lo}, {hi}]",
                bounds.lower(),
                bounds.upper()
            )));
        }
        let mut basis = self.compute_basis(pencil, contour, b)?;
        if project_basis_vectors && psi.ncols() > 0 {
            let projected = self.parallel(basis.vectors.len(), |k| project_out(psi, pencil, &basis.vectors[k]))?;
            basis.vectors = projected;
            basis.residual_norms = self.pole_residuals(pencil, &basis, b)?;
        }
        Ok(basis)
    }

    /// Pole expansion on the positive part of an indefinite pencil; see
    /// [`compute_indefinite_basis`](Self::compute_indefinite_basis).
    pub fn solve_indefinite(
        &self,
        pencil: &Pencil,
        contour: &PoleContour,
        split: &IndefiniteSplit,
        b: &[C64],
        shifts: &[C64],
        project_basis_vectors: bool,
    ) -> Result<(Vec<Vec<C64>>, SolveReport)> {
        let t0 = Instant::now();
        let basis = self.compute_indefinite_basis(pencil, contour, split, b, project_basis_vectors)?;
        let basis_seconds = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let solutions = self.combine_all(&basis, shifts)?;
        let combine_seconds = t1.elapsed().as_secs_f64();
        let mut report = self.report(pencil, &basis, b, shifts, &solutions, basis_seconds, combine_seconds)?;
        report.leakage = solutions
            .iter()
            .map(|u| negative_leakage(&split.psi_minus, pencil, u))
            .collect::<Result<_>>()?;
        Ok((solutions, report))
    }
}

pub fn compute_basis(pencil: &Pencil, contour: &PoleContour, b: &[C64], config: &SubSolveConfig) -> Result<PoleBasis> {
    PoleSolver::new(config.clone()).compute_basis(pencil, contour, b)
}

pub fn combine(basis: &PoleBasis, z: C64) -> Result<Vec<C64>> {
    basis.combine(z)
}

pub fn solve_many(
    pencil: &Pencil,
    contour: &PoleContour,
    b: &[C64],
    shifts: &[C64],
    config: &SubSolveConfig,
) -> Result<(Vec<Vec<C64>>, SolveReport)> {
    let (u, report, _) = PoleSolver::new(config.clone()).solve_many(pencil, contour, b, shifts)?;
    Ok((u, report))
}

pub fn solve_multi_rhs(
    pencil: &Pencil,
    contour: &PoleContour,
    rhs: &[Vec<C64>],
    shifts: &[C64],
    config: &SubSolveConfig,
    low_memory: bool,
) -> Result<MultiRhsSolution> {
    PoleSolver::new(config.clone()).solve_multi_rhs(pencil, contour, rhs, shifts, low_memory)
}

pub fn solve_indefinite(
    pencil: &Pencil,
    contour: &PoleContour,
    split: &IndefiniteSplit,
    b: &[C64],
    shifts: &[C64],
    config: &SubSolveConfig,
    project_basis_vectors: bool,
) -> Result<(Vec<Vec<C64>>, SolveReport)> {
    PoleSolver::new(config.clone()).solve_indefinite(pencil, contour, split, b, shifts, project_basis_vectors)
}
