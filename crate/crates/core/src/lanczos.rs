//! Multi-shift Lanczos: one Krylov recurrence for all shifts.
//!
//! For `S ≠ I` the recurrence runs on `A = R⁻* H R⁻¹` with `b̃ = R⁻* b`, and
//! solutions are mapped back with `u = R⁻¹ ũ`. Each shift keeps O(1)
//! vectors: a direction and an iterate for the CG-style variant, two
//! directions and an iterate for the MINRES-style variant.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, scale, DenseMatrix, C64, ZERO};
use crate::pencil::Pencil;
use crate::subsolve::givens;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LanczosVariant {
    /// LDL*-updated tridiagonal solve per shift; requires `Re z ≤ 0`.
    CgStyle,
    /// Residual-minimizing update per shift; any shift off the spectrum.
    MinresStyle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanczosConfig {
    pub variant: LanczosVariant,
    /// Iteration cap; `None` means `10 n`.
    pub max_iter: Option<usize>,
    /// Re-orthogonalize every Lanczos vector against all previous ones.
    pub full_reorthogonalization: bool,
    /// Interval of the true-residual drift check.
    pub drift_check_every: usize,
    /// Record `(k, shift, residual)` for every active shift and iteration.
    pub log: bool,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        Self {
            variant: LanczosVariant::CgStyle,
            max_iter: None,
            full_reorthogonalization: false,
            drift_check_every: 25,
            log: false,
        }
    }
}

impl LanczosConfig {
    pub fn with_variant(variant: LanczosVariant) -> Self {
        Self {
            variant,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub k: usize,
    pub shift_index: usize,
    pub residual: f64,
}

/// Work counters of one solve.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LanczosCounters {
    /// Applications of the transformed operator in the recurrence.
    pub operator_applications: usize,
    /// Length-n vector updates spent in per-shift trackers.
    pub shift_vector_ops: usize,
    /// Extra operator applications spent on residual checks.
    pub check_applications: usize,
}

#[derive(Debug, Clone)]
pub struct MultishiftResult {
    pub solutions: Vec<Vec<C64>>,
    /// Lanczos iterations performed.
    pub iterations: usize,
    /// Iteration at which each shift was frozen (or the final iteration).
    pub shift_iterations: Vec<usize>,
    /// True relative residuals `‖b − (H − z S) x‖₂ / ‖b‖₂`, recomputed.
    pub residuals: Vec<f64>,
    pub converged: Vec<bool>,
    pub breakdown: bool,
    pub counters: LanczosCounters,
    pub log: Vec<LogEntry>,
    /// Lanczos coefficients `α_k` and `β_{k+1}`.
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl MultishiftResult {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// The iteration log as JSON lines.
    pub fn log_json_lines(&self) -> String {
        self.log
            .iter()
            .map(|e| serde_json::to_string(e).expect("plain struct") + "\n")
            .collect()
    }
}

#[derive(Debug, Clone)]
enum Recurrence {
    Cg {
        p: Vec<C64>,
        zeta: C64,
        eta: C64,
    },
    Minres {
        w1: Vec<C64>,
        w2: Vec<C64>,
        rot1: (f64, C64),
        rot2: (f64, C64),
        phibar: C64,
    },
}

#[derive(Debug, Clone)]
struct Tracker {
    z: C64,
    tol: f64,
    x: Vec<C64>,
    rec: Recurrence,
    residual: f64,
    drift: f64,
    tighten: f64,
    frozen: bool,
    frozen_at: usize,
}

impl Tracker {
    fn new(z: C64, tol: f64, n: usize, beta0: f64, variant: LanczosVariant) -> Self {
        let rec = match variant {
            LanczosVariant::CgStyle => Recurrence::Cg {
                p: vec![ZERO; n],
                zeta: C64::new(beta0, 0.0),
                eta: ZERO,
            },
            LanczosVariant::MinresStyle => Recurrence::Minres {
                w1: vec![ZERO; n],
                w2: vec![ZERO; n],
                rot1: (1.0, ZERO),
                rot2: (1.0, ZERO),
                phibar: C64::new(beta0, 0.0),
            },
        };
        Self {
            z,
            tol,
            x: vec![ZERO; n],
            rec,
            residual: beta0,
            drift: 1.0,
            tighten: 1.0,
            frozen: false,
            frozen_at: 0,
        }
    }

    /// Advance with Lanczos column `m` (1-based): `α_m`, `β_m`, `β_{m+1}`
    /// and `v_m`. Returns the number of length-n vector updates.
    fn step(&mut self, m: usize, alpha: f64, beta: f64, beta_next: f64, v: &[C64]) -> usize {
        let z = self.z;
        match &mut self.rec {
            Recurrence::Cg { p, zeta, eta } => {
                let lambda = if m == 1 { ZERO } else { beta / *eta };
                if m > 1 {
                    *zeta = -lambda * *zeta;
                }
                *eta = alpha - z - lambda * beta;
                let inv = 1.0 / *eta;
                for (pi, vi) in p.iter_mut().zip(v) {
                    *pi = (vi - beta * *pi) * inv;
                }
                axpy(*zeta, p, &mut self.x);
                self.residual = beta_next * (*zeta * inv).norm();
                2
            }
            Recurrence::Minres {
                w1,
                w2,
                rot1,
                rot2,
                phibar,
            } => {
                let eps = rot2.1 * beta;
                let gamma = rot2.0 * beta;
                let delta = C64::new(alpha, 0.0) - z;
                let delta1 = rot1.0 * gamma + rot1.1 * delta;
                let delta2 = -rot1.1.conj() * gamma + rot1.0 * delta;
                let (c, s, rho) = givens(delta2, C64::new(beta_next, 0.0));
                let phi = c * *phibar;
                *phibar = -s.conj() * *phibar;
                let inv = 1.0 / rho;
                for ((a, b), vi) in w2.iter_mut().zip(w1.iter()).zip(v) {
                    // w2 becomes the new direction; w1 keeps the previous one
                    *a = (vi - delta1 * b - eps * *a) * inv;
                }
                std::mem::swap(w1, w2);
                axpy(phi, w1, &mut self.x);
                *rot2 = *rot1;
                *rot1 = (c, s);
                self.residual = phibar.norm();
                2
            }
        }
    }
}

fn project(basis: &[Vec<C64>], w: &mut [C64]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, w);
            axpy(-c, q, w);
        }
    }
}

/// Solve `(H − z_l S) x_l = b` for all shifts from one Lanczos recurrence.
///
/// `tols` holds one tolerance per shift, or a single value for all. With a
/// projection basis `Ψ₋` (S-orthonormal columns) every Lanczos vector is kept
/// S-orthogonal to it; the system solved is then the one with right-hand side
/// `b − S Ψ₋ Ψ₋* b`, and residuals are reported against that vector.
pub fn multishift_solve(
    pencil: &Pencil,
    b: &[C64],
    shifts: &[C64],
    tols: &[f64],
    config: &LanczosConfig,
    projection_basis: Option<&DenseMatrix>,
) -> Result<MultishiftResult> {
    let n = pencil.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    let tols: Vec<f64> = match tols.len() {
        1 => vec![tols[0]; shifts.len()],
        l if l == shifts.len() => tols.to_vec(),
        l => {
            return Err(Error::Invalid(format!("{l} tolerances for {} shifts", shifts.len())));
        }
    };
    if let Some(t) = tols.iter().find(|t| !(**t > 0.0)) {
        return Err(Error::Invalid(format!("tolerance {t} must be positive")));
    }
    if config.variant == LanczosVariant::CgStyle {
        if let Some(z) = shifts.iter().find(|z| z.re > 0.0) {
            return Err(Error::InvalidShift(*z, "Re z > 0 needs the MINRES-style variant".into()));
        }
    }
    if let Some(basis) = projection_basis {
        if basis.ncols() > 0 && basis.nrows() != n {
            return Err(Error::DimensionMismatch { expected: n, got: basis.nrows() });
        }
    }
    let max_iter = config.max_iter.unwrap_or(10 * n).max(1);

    // Ψ̃ = R Ψ₋ has orthonormal columns
    let tbasis: Vec<Vec<C64>> = projection_basis
        .map(|bs| {
            (0..bs.ncols())
                .map(|j| pencil.apply_r(&bs.column(j).iter().copied().collect::<Vec<_>>()))
                .collect()
        })
        .unwrap_or_default();

    let mut bt = pencil.transform_rhs(b);
    project(&tbasis, &mut bt);
    // right-hand side actually solved, in the original variables
    let b_eff = if tbasis.is_empty() { b.to_vec() } else { dual_back_transform(pencil, &bt) };
    let nb_eff = norm(&b_eff);
    let beta0 = norm(&bt);

    let mut counters = LanczosCounters::default();
    let mut log = Vec::new();
    if beta0 == 0.0 || nb_eff == 0.0 {
        return Ok(MultishiftResult {
            solutions: vec![vec![ZERO; n]; shifts.len()],
            iterations: 0,
            shift_iterations: vec![0; shifts.len()],
            residuals: vec![0.0; shifts.len()],
            converged: vec![true; shifts.len()],
            breakdown: false,
            counters,
            log,
            alphas: Vec::new(),
            betas: Vec::new(),
        });
    }

    let mut trackers: Vec<Tracker> = shifts
        .iter()
        .zip(&tols)
        .map(|(&z, &tol)| Tracker::new(z, tol, n, beta0, config.variant))
        .collect();

    let mut v_prev = vec![ZERO; n];
    let mut v = bt.clone();
    scale(C64::new(1.0 / beta0, 0.0), &mut v);
    let mut all_v: Vec<Vec<C64>> = Vec::new();
    let mut w = vec![ZERO; n];
    let mut beta = 0.0;
    let mut t_scale = 0.0f64;
    let mut breakdown = false;
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    let mut k = 0;

    let true_residual_transformed = |x: &[C64], z: C64, counters: &mut LanczosCounters| -> f64 {
        let mut ax = vec![ZERO; n];
        pencil.apply_transformed(x, &mut ax);
        counters.check_applications += 1;
        ax.iter().zip(x).zip(&bt).map(|((a, xi), bi)| (bi - (a - z * xi)).norm_sqr()).sum::<f64>().sqrt()
    };
    let true_residual_original = |xt: &[C64], z: C64, counters: &mut LanczosCounters| -> (Vec<C64>, f64) {
        let x = pencil.back_transform(xt);
        counters.check_applications += 1;
        let r = pencil.relative_residual(z, &x, &b_eff);
        (x, r)
    };

    while k < max_iter {
        k += 1;
        pencil.apply_transformed(&v, &mut w);
        counters.operator_applications += 1;
        axpy(C64::new(-beta, 0.0), &v_prev, &mut w);
        let alpha = dot(&v, &w).re;
        axpy(C64::new(-alpha, 0.0), &v, &mut w);
        // local re-orthogonalization against the last two vectors
        for q in [&v, &v_prev] {
            let c = dot(q, &w);
            axpy(-c, q, &mut w);
        }
        if config.full_reorthogonalization {
            all_v.push(v.clone());
            for q in &all_v {
                let c = dot(q, &w);
                axpy(-c, q, &mut w);
            }
        }
        project(&tbasis, &mut w);
        let beta_next = norm(&w);
        t_scale = t_scale.max(alpha.abs()).max(beta_next);
        let lucky = beta_next <= 1e-14 * t_scale;
        let beta_used = if lucky { 0.0 } else { beta_next };
        alphas.push(alpha);
        betas.push(beta_next);

        let active: usize = trackers.iter().filter(|t| !t.frozen).count();
        let ops: usize = trackers
            .par_iter_mut()
            .filter(|t| !t.frozen)
            .map(|t| t.step(k, alpha, beta, beta_used, &v))
            .sum();
        counters.shift_vector_ops += ops;
        debug_assert!(ops == 2 * active);

        let check_drift = config.drift_check_every > 0 && k % config.drift_check_every == 0;
        for (l, t) in trackers.iter_mut().enumerate() {
            if t.frozen {
                continue;
            }
            if check_drift && t.residual > 0.0 {
                let tr = true_residual_transformed(&t.x, t.z, &mut counters);
                t.drift = (tr / t.residual).max(1.0);
            }
            if config.log {
                log.push(LogEntry {
                    k,
                    shift_index: l,
                    residual: t.residual * t.drift / beta0,
                });
            }
            if t.residual * t.drift <= t.tol * beta0 * t.tighten || lucky {
                let (_, r) = true_residual_original(&t.x, t.z, &mut counters);
                if r <= t.tol || lucky {
                    t.frozen = true;
                    t.frozen_at = k;
                } else {
                    // recurrence looked converged but the original residual did not follow
                    t.tighten *= (0.5 * t.tol / r).min(0.5);
                }
            }
        }

        if lucky {
            breakdown = true;
            break;
        }
        if trackers.iter().all(|t| t.frozen) {
            break;
        }
        std::mem::swap(&mut v_prev, &mut v);
        v.copy_from_slice(&w);
        scale(C64::new(1.0 / beta_next, 0.0), &mut v);
        beta = beta_next;
    }

    let mut solutions = Vec::with_capacity(shifts.len());
    let mut residuals = Vec::with_capacity(shifts.len());
    let mut converged = Vec::with_capacity(shifts.len());
    let mut shift_iterations = Vec::with_capacity(shifts.len());
    for t in &mut trackers {
        project(&tbasis, &mut t.x);
        let (x, r) = true_residual_original(&t.x, t.z, &mut counters);
        converged.push(r <= t.tol);
        residuals.push(r);
        shift_iterations.push(if t.frozen { t.frozen_at } else { k });
        solutions.push(x);
    }
    Ok(MultishiftResult {
        solutions,
        iterations: k,
        shift_iterations,
        residuals,
        converged,
        breakdown,
        counters,
        log,
        alphas,
        betas,
    })
}

/// `R* y = S R⁻¹ y`, the inverse of `transform_rhs`.
fn dual_back_transform(pencil: &Pencil, y: &[C64]) -> Vec<C64> {
    let t = pencil.back_transform(y);
    let mut out = vec![ZERO; t.len()];
    pencil.apply_s(&t, &mut out);
    out
}
