use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;

use pole_expansion::contour::{build_contour, required_poles, SpectralBounds};
use pole_expansion::harness::experiments::{
    bench_compare, bench_multi_rhs, bench_shift_scaling, fig_numpoles, fig_pole_decay, fig_z_sweep, write_experiment,
    CompareConfig, Experiment, MultiRhsConfig, NumPolesConfig, PoleDecayConfig, ShiftScalingConfig, ZSweepConfig,
};
use pole_expansion::harness::io::{read_shifts, SolutionBundle};
use pole_expansion::harness::{
    apply_chi0, chi0_sum_over_states, gen_grid_hamiltonian, Chi0Method, Chi0Problem, GridSpec, Potential,
};
use pole_expansion::lanczos::{multishift_solve, LanczosConfig};
use pole_expansion::pencil::{estimate_spectral_bounds, read_matrix_market, read_vector, Pencil, DEFAULT_BOUND_ITERS, DEFAULT_SAFETY};
use pole_expansion::pole::PoleSolver;
use pole_expansion::subsolve::{SubSolveConfig, SubSolveMethod};

#[derive(Parser)]
#[command(name = "polex", version, about = "Pole-expansion solvers for shifted Hermitian systems")]
struct Cli {
    /// Seed for every randomized path.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for pole solves (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a pole contour and write it as JSON.
    GenContour {
        #[arg(long)]
        min: f64,
        #[arg(long)]
        max: f64,
        #[arg(long)]
        poles: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve (H − zS)u = b for a list of shifts.
    Solve(SolveArgs),
    /// Apply χ₀(iω) to a perturbation on a 1-D or 2-D grid.
    Chi0(Chi0Args),
    /// Run an experiment and write CSV and JSON outputs.
    Bench {
        #[arg(value_enum)]
        which: Bench,
        #[arg(long, default_value = "results")]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Pole,
    Lanczos,
}

#[derive(Clone, Copy, ValueEnum)]
enum SubSolver {
    Direct,
    Gmres,
    Sqmr,
}

#[derive(Clone, Copy, ValueEnum)]
enum Bench {
    Compare,
    MultiRhs,
    Decay,
    Numpoles,
    Zsweep,
    Scaling,
}

#[derive(Args)]
struct SolveArgs {
    /// Hamiltonian in Matrix Market coordinate format.
    #[arg(long)]
    pencil: PathBuf,
    /// Overlap matrix S; the identity when omitted.
    #[arg(long)]
    overlap: Option<PathBuf>,
    #[arg(long)]
    rhs: PathBuf,
    /// JSON array of [re, im] pairs.
    #[arg(long)]
    shifts: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Pole)]
    method: Method,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Pole count; chosen from the scalar error at `tol` when omitted.
    #[arg(long)]
    poles: Option<usize>,
    #[arg(long, value_enum, default_value_t = SubSolver::Direct)]
    sub_solver: SubSolver,
    /// Lanczos steps for the spectral bound estimate.
    #[arg(long, default_value_t = DEFAULT_BOUND_ITERS)]
    bound_iters: usize,
    /// Relative widening of the estimated bounds.
    #[arg(long, default_value_t = DEFAULT_SAFETY)]
    safety: f64,
    /// Lower spectral bound; skips estimation together with `--bound-max`.
    #[arg(long, requires = "bound_max")]
    bound_min: Option<f64>,
    #[arg(long, requires = "bound_min")]
    bound_max: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Chi0Args {
    /// Grid shape, e.g. `64` or `32x32`.
    #[arg(long, default_value = "64")]
    grid: String,
    /// Period length along the first axis.
    #[arg(long, default_value_t = 16.0)]
    length: f64,
    #[arg(long)]
    ne: usize,
    /// Comma-separated frequencies ω.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    omega_list: Vec<f64>,
    /// Perturbation vector; random when omitted.
    #[arg(long)]
    g: Option<PathBuf>,
    /// Random Gaussian wells in the potential.
    #[arg(long, default_value_t = 3)]
    wells: usize,
    #[arg(long, default_value_t = -3.0)]
    well_depth: f64,
    #[arg(long, value_enum, default_value_t = Method::Pole)]
    method: Method,
    #[arg(long, default_value_t = 60)]
    poles: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::GenContour { min, max, poles, out } => {
            let contour = build_contour(SpectralBounds::new(min, max)?, poles)?;
            std::fs::write(&out, contour.to_json()?).with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {poles} poles on [{min}, {max}] to {}", out.display());
        }
        Command::Solve(args) => solve(&args, cli.threads)?,
        Command::Chi0(args) => chi0(&args, cli.seed)?,
        Command::Bench { which, out_dir } => bench(which, &out_dir, cli.seed, cli.threads)?,
    }
    Ok(())
}

fn load_pencil(h: &Path, s: Option<&Path>) -> Result<Pencil> {
    let h = read_matrix_market(h).with_context(|| format!("reading {}", h.display()))?;
    let s = s
        .map(|p| read_matrix_market(p).with_context(|| format!("reading {}", p.display())))
        .transpose()?;
    Ok(Pencil::new(h, s)?)
}

fn solve(args: &SolveArgs, threads: usize) -> Result<()> {
    let pencil = load_pencil(&args.pencil, args.overlap.as_deref())?;
    let b = read_vector(&args.rhs).with_context(|| format!("reading {}", args.rhs.display()))?;
    let shifts = read_shifts(&args.shifts).with_context(|| format!("reading {}", args.shifts.display()))?;
    if let Some(z) = shifts.iter().find(|z| z.re > 0.0) {
        bail!("shift {z} has positive real part");
    }
    let bundle = match args.method {
        Method::Pole => {
            let bounds = match (args.bound_min, args.bound_max) {
                (Some(lo), Some(hi)) => SpectralBounds::new(lo, hi)?,
                _ => estimate_spectral_bounds(&pencil, args.bound_iters, args.safety)?,
            };
            let poles = match args.poles {
                Some(p) => p,
                None => choose_poles(bounds, &shifts, args.tol)?,
            };
            let contour = build_contour(bounds, poles)?;
            let config = match args.sub_solver {
                SubSolver::Direct => SubSolveConfig::direct(),
                SubSolver::Gmres => SubSolveConfig::iterative(SubSolveMethod::IterativeGeneral, args.tol),
                SubSolver::Sqmr => SubSolveConfig::iterative(SubSolveMethod::IterativeSymmetric, args.tol),
            };
            let solver = PoleSolver::new(config).with_threads(threads);
            let (sols, report, _) = solver.solve_many(&pencil, &contour, &b, &shifts)?;
            if !report.flagged_poles.is_empty() {
                eprintln!("warning: sub-solves missed tolerance at poles {:?}", report.flagged_poles);
            }
            println!(
                "pole expansion: P = {poles} on [{:.4e}, {:.4e}], worst residual {:.3e}, basis {:.3}s, combine {:.3}s",
                bounds.lower(),
                bounds.upper(),
                report.max_shift_residual(),
                report.basis_seconds,
                report.combine_seconds
            );
            if report.max_shift_residual() > 100.0 * args.tol {
                eprintln!("warning: residuals well above --tol; the bounds may miss part of the spectrum (try a larger --bound-iters)");
            }
            let mut bundle = SolutionBundle::new("pole", &shifts, report.shift_residuals, &sols);
            bundle.poles = Some(poles);
            bundle
        }
        Method::Lanczos => {
            let r = multishift_solve(&pencil, &b, &shifts, &[args.tol], &LanczosConfig::default(), None)?;
            let residuals: Vec<f64> = shifts
                .iter()
                .zip(&r.solutions)
                .map(|(&z, u)| pencil.relative_residual(z, u, &b))
                .collect();
            println!(
                "multi-shift Lanczos: {} iterations, converged {}, worst residual {:.3e}",
                r.iterations,
                r.all_converged(),
                residuals.iter().copied().fold(0.0, f64::max)
            );
            let mut bundle = SolutionBundle::new("lanczos", &shifts, residuals, &r.solutions);
            bundle.iterations = Some(r.iterations);
            bundle
        }
    };
    bundle.save(&args.out).with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

/// Largest pole count required over the shifts, at `tol`.
fn choose_poles(bounds: SpectralBounds, shifts: &[C64], tol: f64) -> Result<usize> {
    let mut poles = 2;
    for &z in shifts {
        poles = poles.max(required_poles(bounds, z, tol, 2000)?);
    }
    Ok(poles)
}

fn parse_shape(s: &str) -> Result<Vec<usize>> {
    let shape = s
        .split('x')
        .map(|p| p.trim().parse::<usize>().with_context(|| format!("bad grid size {p:?}")))
        .collect::<Result<Vec<_>>>()?;
    if shape.is_empty() || shape.len() > 2 {
        bail!("grid must be 1-D or 2-D, got {s:?}");
    }
    Ok(shape)
}

fn chi0(args: &Chi0Args, seed: u64) -> Result<()> {
    let shape = parse_shape(&args.grid)?;
    let potential = Potential::RandomWells {
        count: args.wells,
        depth: args.well_depth,
        width: 1.0,
    };
    let spec = GridSpec::new(shape, args.length, potential).with_seed(seed);
    let pencil = gen_grid_hamiltonian(&spec)?.to_pencil()?;
    let n = pencil.dim();
    let g: Vec<f64> = match &args.g {
        Some(path) => read_vector(path)?.iter().map(|v| v.re).collect(),
        None => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
        }
    };
    let problem = Chi0Problem::from_pencil(&pencil, args.ne, g, args.omega_list.clone())?;
    let method = match args.method {
        Method::Pole => Chi0Method::Pole {
            poles: args.poles,
            config: SubSolveConfig::direct(),
        },
        Method::Lanczos => Chi0Method::Lanczos {
            tol: args.tol,
            config: LanczosConfig::default(),
        },
    };
    let result = apply_chi0(&problem, &pencil, &method)?;
    println!("omega,relative_error_vs_sum_over_states,g_dot_chi0_g");
    for (l, &w) in args.omega_list.iter().enumerate() {
        let oracle = chi0_sum_over_states(&problem, w);
        let r = &result.responses[l];
        let d: f64 = r.iter().zip(&oracle).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let nb: f64 = oracle.iter().map(|b| b * b).sum::<f64>().sqrt();
        let quad: f64 = problem.g.iter().zip(r).map(|(a, b)| a * b).sum();
        println!("{w},{:.3e},{quad:.6e}", d / nb);
    }
    println!(
        "gap {:.4e}, work {}, occupied overlap {:.2e}",
        problem.unoccupied_energies[0], result.work, result.orthogonality
    );
    if let Some(out) = &args.out {
        std::fs::write(out, serde_json::to_string(&result)?).with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(())
}

fn bench(which: Bench, out_dir: &Path, seed: u64, threads: usize) -> Result<()> {
    let exp: Box<dyn Experiment> = match which {
        Bench::Compare => Box::new(bench_compare(&CompareConfig {
            seed,
            threads,
            ..Default::default()
        })?),
        Bench::MultiRhs => Box::new(bench_multi_rhs(&MultiRhsConfig {
            seed,
            threads,
            ..Default::default()
        })?),
        Bench::Decay => Box::new(fig_pole_decay(&PoleDecayConfig::default())?),
        Bench::Numpoles => Box::new(fig_numpoles(&NumPolesConfig::default())?),
        Bench::Zsweep => Box::new(fig_z_sweep(&ZSweepConfig::default())?),
        Bench::Scaling => Box::new(bench_shift_scaling(&ShiftScalingConfig::default())?),
    };
    let (csv, json) = write_experiment(out_dir, exp.as_ref())?;
    println!("{}", serde_json::to_string_pretty(&exp.summary())?);
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(())
}
