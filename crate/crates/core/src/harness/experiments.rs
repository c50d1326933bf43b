//! Experiment suite. Every experiment returns a typed result that renders
//! as a CSV table (fixed column order, documented per type) and a JSON
//! summary.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::{build_contour, required_poles, scalar_error_sup, SpectralBounds};
use crate::error::Result;
use crate::harness::problems::{gen_grid_hamiltonian, gen_sparse_pencil, GridSpec, Potential};
use crate::lanczos::{multishift_solve, LanczosConfig};
use crate::linalg::C64;
use crate::pencil::{estimate_spectral_bounds, Pencil};
use crate::pole::{CounterSnapshot, PoleSolver};
use crate::subsolve::{PreconditionerSpec, SubSolveConfig, SubSolveMethod};

/// Output of one experiment.
pub trait Experiment {
    /// File stem for the CSV and JSON outputs.
    fn name(&self) -> &'static str;
    fn csv(&self) -> String;
    fn summary(&self) -> serde_json::Value;
}

/// Write `<name>.csv` and `<name>.json` into `dir`.
pub fn write_experiment(dir: &Path, exp: &dyn Experiment) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{}.csv", exp.name()));
    let json = dir.join(format!("{}.json", exp.name()));
    std::fs::write(&csv, exp.csv())?;
    std::fs::write(&json, serde_json::to_string_pretty(&exp.summary())?)?;
    Ok((csv, json))
}

/// Least-squares line `y ≈ slope·x + intercept` with its R².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r_squared = if sxx > 0.0 && syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    }
}

pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..count)
        .map(|i| {
            if count == 1 {
                lo
            } else {
                10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64)
            }
        })
        .collect()
}

/// `count` equispaced values in `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| if count == 1 { lo } else { lo + (hi - lo) * i as f64 / (count - 1) as f64 })
        .collect()
}

/// `i·η` for `count` equispaced `η ∈ [−span, span]`.
pub fn imaginary_shift_set(count: usize, span: f64) -> Vec<C64> {
    linspace(-span, span, count).into_iter().map(|eta| C64::new(0.0, eta)).collect()
}

/// Lanczos settings for the contour bounds of the solver benchmarks. The
/// grid problems have slowly converging low ends, so the defaults run
/// longer and widen more than the library defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundEstimate {
    pub iters: usize,
    pub safety: f64,
}

impl Default for BoundEstimate {
    fn default() -> Self {
        Self { iters: 200, safety: 0.1 }
    }
}

impl BoundEstimate {
    pub fn estimate(&self, pencil: &Pencil) -> Result<SpectralBounds> {
        estimate_spectral_bounds(pencil, self.iters, self.safety)
    }
}

// ---------------------------------------------------------------- pole decay

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoleDecayConfig {
    pub lower: f64,
    pub upper: f64,
    pub z: C64,
    pub poles: Vec<usize>,
    pub samples: usize,
    /// Attainable accuracy in double precision.
    pub floor: f64,
}

impl Default for PoleDecayConfig {
    fn default() -> Self {
        Self {
            lower: 1.0,
            upper: 1000.0,
            z: C64::new(0.0, 1.0),
            poles: (1..=8).map(|k| 10 * k).collect(),
            samples: 10_000,
            floor: 1e-13,
        }
    }
}

/// CSV columns: `poles,error,log10_error`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoleDecayResult {
    pub config: PoleDecayConfig,
    pub errors: Vec<f64>,
    /// Strictly decreasing while the error is above `10 · floor`.
    pub decreasing_until_floor: bool,
    /// Fit of `log10(error)` against `P` over points above `10 · floor`.
    pub fit: LinearFit,
}

impl PoleDecayResult {
    pub fn error_at(&self, poles: usize) -> Option<f64> {
        self.config.poles.iter().position(|&p| p == poles).map(|i| self.errors[i])
    }
}

pub fn fig_pole_decay(config: &PoleDecayConfig) -> Result<PoleDecayResult> {
    let bounds = SpectralBounds::new(config.lower, config.upper)?;
    let errors = config
        .poles
        .par_iter()
        .map(|&p| scalar_error_sup(&build_contour(bounds, p)?, (config.lower, config.upper), config.z, config.samples))
        .collect::<Result<Vec<f64>>>()?;
    let near_floor = 10.0 * config.floor;
    let decreasing_until_floor = errors.windows(2).all(|w| w[0] <= near_floor || w[1] < w[0]);
    let (x, y): (Vec<f64>, Vec<f64>) = config
        .poles
        .iter()
        .zip(&errors)
        .filter(|(_, &e)| e > near_floor)
        .map(|(&p, &e)| (p as f64, e.log10()))
        .unzip();
    Ok(PoleDecayResult {
        config: config.clone(),
        errors,
        decreasing_until_floor,
        fit: linear_fit(&x, &y),
    })
}

impl Experiment for PoleDecayResult {
    fn name(&self) -> &'static str {
        "pole_decay"
    }

    fn csv(&self) -> String {
        let mut s = String::from("poles,error,log10_error\n");
        for (p, e) in self.config.poles.iter().zip(&self.errors) {
            s += &format!("{p},{e:.6e},{:.6}\n", e.log10());
        }
        s
    }

    fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "experiment": self.name(),
            "interval": [self.config.lower, self.config.upper],
            "z": [self.config.z.re, self.config.z.im],
            "samples": self.config.samples,
            "decreasing_until_floor": self.decreasing_until_floor,
            "fit_slope": self.fit.slope,
            "fit_r_squared": self.fit.r_squared,
            "min_error": self.errors.iter().copied().fold(f64::INFINITY, f64::min),
        })
    }
}

// ------------------------------------------------------------- pole counts

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NumPolesConfig {
    pub sigmas: Vec<f64>,
    pub upper: f64,
    pub z: C64,
    pub tol: f64,
    pub samples: usize,
}

impl Default for NumPolesConfig {
    fn default() -> Self {
        Self {
            sigmas: logspace(1e-4, 1.0, 20),
            upper: 10.0,
            z: C64::new(0.0, 1.0),
            tol: 1e-8,
            samples: 10_000,
        }
    }
}

/// CSV columns: `sigma,log10_ratio,poles` with `ratio = upper / sigma`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NumPolesResult {
    pub config: NumPolesConfig,
    pub poles: Vec<usize>,
    /// Non-increasing as `σ` grows.
    pub non_increasing: bool,
    /// Fit of `P` against `log10(upper / σ)`.
    pub fit: LinearFit,
}

pub fn fig_numpoles(config: &NumPolesConfig) -> Result<NumPolesResult> {
    let poles = config
        .sigmas
        .par_iter()
        .map(|&s| required_poles(SpectralBounds::new(s, config.upper)?, config.z, config.tol, config.samples))
        .collect::<Result<Vec<usize>>>()?;
    let mut order: Vec<usize> = (0..poles.len()).collect();
    order.sort_by(|&a, &b| config.sigmas[a].total_cmp(&config.sigmas[b]));
    let non_increasing = order.windows(2).all(|w| poles[w[1]] <= poles[w[0]]);
    let x: Vec<f64> = config.sigmas.iter().map(|s| (config.upper / s).log10()).collect();
    let y: Vec<f64> = poles.iter().map(|&p| p as f64).collect();
    Ok(NumPolesResult {
        config: config.clone(),
        fit: linear_fit(&x, &y),
        poles,
        non_increasing,
    })
}

impl Experiment for NumPolesResult {
    fn name(&self) -> &'static str {
        "numpoles"
    }

    fn csv(&self) -> String {
        let mut s = String::from("sigma,log10_ratio,poles\n");
        for (sig, p) in self.config.sigmas.iter().zip(&self.poles) {
            s += &format!("{sig:.6e},{:.6},{p}\n", (self.config.upper / sig).log10());
        }
        s
    }

    fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "experiment": self.name(),
            "upper": self.config.upper,
            "tol": self.config.tol,
            "non_increasing": self.non_increasing,
            "fit_slope": self.fit.slope,
            "fit_r_squared": self.fit.r_squared,
            "max_poles": self.poles.iter().max(),
        })
    }
}

// ----------------------------------------------------------------- z sweep

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZSweepConfig {
    pub lower: f64,
    pub upper: f64,
    pub poles: usize,
    pub re_range: (f64, f64),
    pub im_range: (f64, f64),
    pub grid: (usize, usize),
    pub samples: usize,
}

impl Default for ZSweepConfig {
    fn default() -> Self {
        Self {
            lower: 1.0,
            upper: 1000.0,
            poles: 60,
            re_range: (-50.0, 0.0),
            im_range: (-50.0, 50.0),
            grid: (50, 50),
            samples: 10_000,
        }
    }
}

/// CSV columns: `re,im,error`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZSweepResult {
    pub config: ZSweepConfig,
    pub shifts: Vec<C64>,
    pub errors: Vec<f64>,
    pub max_error: f64,
    pub min_error: f64,
}

impl ZSweepResult {
    pub fn ratio(&self) -> f64 {
        self.max_error / self.min_error
    }
}

pub fn fig_z_sweep(config: &ZSweepConfig) -> Result<ZSweepResult> {
    let contour = build_contour(SpectralBounds::new(config.lower, config.upper)?, config.poles)?;
    let res = linspace(config.re_range.0, config.re_range.1, config.grid.0);
    let ims = linspace(config.im_range.0, config.im_range.1, config.grid.1);
    let shifts: Vec<C64> = res.iter().flat_map(|&re| ims.iter().map(move |&im| C64::new(re, im))).collect();
    let errors = shifts
        .par_iter()
        .map(|&z| scalar_error_sup(&contour, (config.lower, config.upper), z, config.samples))
        .collect::<Result<Vec<f64>>>()?;
    let max_error = errors.iter().copied().fold(0.0, f64::max);
    let min_error = errors.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ZSweepResult {
        config: config.clone(),
        shifts,
        errors,
        max_error,
        min_error,
    })
}

impl Experiment for ZSweepResult {
    fn name(&self) -> &'static str {
        "z_sweep"
    }

    fn csv(&self) -> String {
        let mut s = String::from("re,im,error\n");
        for (z, e) in self.shifts.iter().zip(&self.errors) {
            s += &format!("{:.6},{:.6},{e:.6e}\n", z.re, z.im);
        }
        s
    }

    fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "experiment": self.name(),
            "poles": self.config.poles,
            "interval": [self.config.lower, self.config.upper],
            "shift_count": self.shifts.len(),
            "max_error": self.max_error,
            "min_error": self.min_error,
            "ratio": self.ratio(),
        })
    }
}

// ------------------------------------------------------- solver comparison

/// A 1-D periodic grid with the smooth positive potential
/// `V(x) = 1 + ½ cos(2πx/L) + ¼ cos(6πx/L)`, spacing `1/8`.
pub fn bench_grid(n: usize) -> GridSpec {
    let length = n as f64 / 8.0;
    let values = (0..n)
        .map(|i| {
            let x = i as f64 / n as f64;
            1.0 + 0.5 * (2.0 * PI * x).cos() + 0.25 * (6.0 * PI * x).cos()
        })
        .collect();
    GridSpec::new(vec![n], length, Potential::Values { values })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareConfig {
    pub grid: GridSpec,
    pub poles: usize,
    pub shift_count: usize,
    pub shift_span: f64,
    pub sub_solve: SubSolveConfig,
    /// Use the shifted-Laplacian preconditioner for iterative sub-solves.
    pub precondition: bool,
    pub lanczos: LanczosConfig,
    pub bound_estimate: BoundEstimate,
    pub threads: usize,
    pub seed: u64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            grid: bench_grid(512),
            poles: 60,
            shift_count: 101,
            shift_span: 10.0,
            sub_solve: SubSolveConfig::iterative(SubSolveMethod::IterativeGeneral, 1e-7),
            precondition: true,
            lanczos: LanczosConfig::default(),
            bound_estimate: BoundEstimate::default(),
            threads: 0,
            seed: 0,
        }
    }
}

/// CSV columns: `eta,pole_residual,lanczos_residual,lanczos_iterations`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareResult {
    pub n: usize,
    pub poles: usize,
    pub bounds: (f64, f64),
    pub shifts: Vec<C64>,
    pub pole_residuals: Vec<f64>,
    pub lanczos_residuals: Vec<f64>,
    pub lanczos_shift_iterations: Vec<usize>,
    pub lanczos_iterations: usize,
    pub lanczos_converged: bool,
    pub pole_counters: CounterSnapshot,
    pub pole_sub_iterations: Vec<usize>,
    pub pole_basis_seconds: f64,
    pub pole_combine_seconds: f64,
    pub lanczos_seconds: f64,
}

impl CompareResult {
    pub fn pole_worst(&self) -> f64 {
        self.pole_residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn lanczos_worst(&self) -> f64 {
        self.lanczos_residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Pole expansion against multi-shift Lanczos on a grid Hamiltonian. The
/// Lanczos run is asked for the pole method's worst residual.
pub fn bench_compare(config: &CompareConfig) -> Result<CompareResult> {
    let ham = gen_grid_hamiltonian(&config.grid.clone().with_seed(config.seed))?;
    let pencil = ham.to_pencil()?;
    let bounds = config.bound_estimate.estimate(&pencil)?;
    let contour = build_contour(bounds, config.poles)?;
    let mut sub = config.sub_solve.clone();
    if config.precondition && sub.method != SubSolveMethod::Direct {
        sub.preconditioner = PreconditionerSpec::ShiftedLaplacian(ham.grid.clone());
    }
    let solver = PoleSolver::new(sub).with_threads(config.threads);
    let shifts = imaginary_shift_set(config.shift_count, config.shift_span);
    let b: Vec<C64> = {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.seed);
        (0..pencil.dim()).map(|_| C64::new(rng.random::<f64>() - 0.5, 0.0)).collect()
    };
    let (_, report, basis) = solver.solve_many(&pencil, &contour, &b, &shifts)?;
    let target = report.max_shift_residual();

    let t = Instant::now();
    let lz = multishift_solve(&pencil, &b, &shifts, &[target], &config.lanczos, None)?;
    let lanczos_seconds = t.elapsed().as_secs_f64();
    let lanczos_residuals: Vec<f64> = shifts
        .iter()
        .zip(&lz.solutions)
        .map(|(&z, u)| pencil.relative_residual(z, u, &b))
        .collect();
    Ok(CompareResult {
        n: pencil.dim(),
        poles: config.poles,
        bounds: (bounds.lower(), bounds.upper()),
        shifts,
        pole_residuals: report.shift_residuals,
        lanczos_residuals,
        lanczos_shift_iterations: lz.shift_iterations.clone(),
        lanczos_iterations: lz.iterations,
        lanczos_converged: lz.all_converged(),
        pole_counters: solver.counters(),
        pole_sub_iterations: basis.iterations().to_vec(),
        pole_basis_seconds: report.basis_seconds,
        pole_combine_seconds: report.combine_seconds,
        lanczos_seconds,
    })
}

impl Experiment for CompareResult {
    fn name(&self) -> &'static str {
        "bench_compare"
    }

    fn csv(&self) -> String {
        let mut s = String::from("eta,pole_residual,lanczos_residual,lanczos_iterations\n");
        for l in 0..self.shifts.len() {
            s += &format!(
                "{:.6},{:.6e},{:.6e},{}\n",
                self.shifts[l].im, self.pole_residuals[l], self.lanczos_residuals[l], self.lanczos_shift_iterations[l]
            );
        }
        s
    }

    fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "experiment": self.name(),
            "n": self.n,
            "poles": self.poles,
            "bounds": [self.bounds.0, self.bounds.1],
            "shift_count": self.shifts.len(),
            "pole_worst_residual": self.pole_worst(),
            "lanczos_worst_residual": self.lanczos_worst(),
            "fairness_holds": self.lanczos_worst() <= self.pole_worst(),
            "lanczos_iterations": self.lanczos_iterations,
            "lanczos_converged": self.lanczos_converged,
            "pole_basis_solves": self.pole_counters.basis_solves,
            "pole_sub_iterations_total": self.pole_sub_iterations.iter().sum::<usize>(),
            "pole_combine_ops": self.pole_counters.combine_ops,
            "pole_basis_seconds": self.pole_basis_seconds,
            "pole_combine_seconds": self.pole_combine_seconds,
            "lanczos_seconds": self.lanczos_seconds,
        })
    }
}

// ---------------------------------------------------------- multi-rhs reuse

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiRhsConfig {
    pub shape: [usize; 2],
    pub rhs_count: usize,
    pub poles: usize,
    pub shift_count: usize,
    pub shift_span: f64,
    pub low_memory: bool,
    pub bound_estimate: BoundEstimate,
    pub threads: usize,
    pub seed: u64,
}

impl Default for MultiRhsConfig {
    fn default() -> Self {
        Self {
            shape: [40, 25],
            rhs_count: 20,
            poles: 30,
            shift_count: 11,
            shift_span: 10.0,
            low_memory: false,
            bound_estimate: BoundEstimate::default(),
            threads: 0,
            seed: 0,
        }
    }
}

/// CSV columns: `rhs,max_residual`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiRhsResult {
    pub n: usize,
    pub poles: usize,
    pub low_memory: bool,
    pub max_residuals: Vec<f64>,
    pub counters: CounterSnapshot,
    pub seconds: f64,
}

/// Random real right-hand sides for the multi-rhs benchmark.
pub fn random_real_rhs(n: usize, count: usize, seed: u64) -> Vec<Vec<C64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..n).map(|_| C64::new(rng.random::<f64>() - 0.5, 0.0)).collect())
        .collect()
}

pub fn bench_multi_rhs(config: &MultiRhsConfig) -> Result<MultiRhsResult> {
    let pencil = gen_sparse_pencil(config.shape, config.seed)?;
    let bounds = config.bound_estimate.estimate(&pencil)?;
    let contour = build_contour(bounds, config.poles)?;
    let rhs = random_real_rhs(pencil.dim(), config.rhs_count, config.seed.wrapping_add(1));
    let shifts = imaginary_shift_set(config.shift_count, config.shift_span);
    let solver = PoleSolver::new(SubSolveConfig::direct()).with_threads(config.threads);
    let t = Instant::now();
    let out = solver.solve_multi_rhs(&pencil, &contour, &rhs, &shifts, config.low_memory)?;
    let seconds = t.elapsed().as_secs_f64();
    let max_residuals = out
        .solutions
        .iter()
        .zip(&rhs)
        .map(|(sols, b)| {
            shifts
                .iter()
                .zip(sols)
                .map(|(&z, u)| pencil.relative_residual(z, u, b))
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(MultiRhsResult {
        n: pencil.dim(),
        poles: config.poles,
        low_memory: config.low_memory,
        max_residuals,
        counters: solver.counters(),
        seconds,
    })
}

impl Experiment for MultiRhsResult {
    fn name(&self) -> &'static str {
        "bench_multi_rhs"
    }

    fn csv(&self) -> String {
        let mut s = String::from("rhs,max_residual\n");
        for (i, r) in self.max_residuals.iter().enumerate() {
            s += &format!("{i},{r:.6e}\n");
        }
        s
    }

    fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "experiment": self.name(),
            "n": self.n,
            "poles": self.poles,
            "rhs_count": self.max_residuals.len(),
            "low_memory": self.low_memory,
            "factorizations": self.counters.factorizations,
            "substitutions": self.counters.substitutions,
            "worst_residual": self.max_residuals.iter().copied().fold(0.0, f64::max),
            "seconds": self.seconds,
        })
    }
}

// ------------------------------------------------------------ shift scaling

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftScalingConfig {
    pub grid: GridSpec,
    pub poles: usize,
    pub shift_counts: Vec<usize>,
    pub shift_span: f64,
    pub bound_estimate: BoundEstimate,
}

impl Default for ShiftScalingConfig {
    fn default() -> Self {
        Self {
            grid: bench_grid(256),
            poles: 40,
            shift_counts: vec![3, 11, 101, 1001],
            shift_span: 10.0,
            bound_estimate: BoundEstimate::default(),
        }
    }
}

/// CSV columns: `shifts,basis_solves,combine_ops,basis_seconds,combine_seconds`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftScalingResult {
    pub n: usize,
    pub poles: usize,
    pub shift_counts: Vec<usize>,
    pub basis_solves: Vec<u64>,
    pub combine_ops: Vec<u64>,
    pub basis_seconds: Vec<f64>,
    pub combine_seconds: Vec<f64>,
    /// Fit of combine operations against the shift count.
    pub fit: LinearFit,
}

pub fn bench_shift_scaling(config: &ShiftScalingConfig) -> Result<ShiftScalingResult> {
    let ham = gen_grid_hamiltonian(&config.grid)?;
    let pencil = ham.to_pencil()?;
    let bounds = config.bound_estimate.estimate(&pencil)?;
    let contour = build_contour(bounds, config.poles)?;
    let b: Vec<C64> = (0..pencil.dim()).map(|i| C64::new((0.37 * i as f64).sin(), 0.0)).collect();
    let mut out = ShiftScalingResult {
        n: pencil.dim(),
        poles: config.poles,
        shift_counts: config.shift_counts.clone(),
        basis_solves: Vec::new(),
        combine_ops: Vec::new(),
        basis_seconds: Vec::new(),
        combine_seconds: Vec::new(),
        fit: linear_fit(&[], &[]),
    };
    for &count in &config.shift_counts {
        let solver = PoleSolver::new(SubSolveConfig::direct());
        let shifts = imaginary_shift_set(count, config.shift_span);
        let (_, report, _) = solver.solve_many(&pencil, &contour, &b, &shifts)?;
        let c = solver.counters();
        out.basis_solves.push(c.basis_solves);
        out.combine_ops.push(c.combine_ops);
        out.basis_seconds.push(report.basis_seconds);
        out.combine_seconds.push(report.combine_seconds);
    }
    let x: Vec<f64> = out.shift_counts.iter().map(|&c| c as f64).collect();
    let y: Vec<f64> = out.combine_ops.iter().map(|&c| c as f64).collect();
    out.fit = linear_fit(&x, &y);
    Ok(out)
}

impl Experiment for ShiftScalingResult {
    fn name(&self) -> &'static str {
        "shift_scaling"
    }

    fn csv(&self) -> String {
        let mut s = String::from("shifts,basis_solves,combine_ops,basis_seconds,combine_seconds\n");
        for i in 0..self.shift_counts.len() {
            s += &format!(
                "{},{},{},{:.6e},{:.6e}\n",
                self.shift_counts[i], self.basis_solves[i], self.combine_ops[i], self.basis_seconds[i], self.combine_seconds[i]
            );
        }
        s
    }

    fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "experiment": self.name(),
            "n": self.n,
            "poles": self.poles,
            "combine_slope": self.fit.slope,
            "combine_slope_over_pn": self.fit.slope / (self.poles * self.n) as f64,
            "fit_r_squared": self.fit.r_squared,
            "basis_solves": self.basis_solves,
        })
    }
}
