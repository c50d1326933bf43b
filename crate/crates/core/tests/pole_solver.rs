use num_complex::Complex64 as C64;
use pole_expansion::contour::{build_contour, scalar_error_sup, SpectralBounds};
use pole_expansion::harness::experiments::{bench_grid, imaginary_shift_set};
use pole_expansion::harness::{gen_grid_hamiltonian, gen_random_pencil, RandomPencil};
use pole_expansion::linalg::DenseMatrix;
use pole_expansion::pencil::{
    dense_generalized_eig, estimate_spectral_bounds, negative_leakage, project_out_rhs, HermitianOperator, Pencil,
};
use pole_expansion::pole::{BasisStorage, PoleBasis, PoleSolver};
use pole_expansion::sparse::CsrMatrix;
use pole_expansion::subsolve::{direct_factor, SubSolveConfig, SubSolveMethod};
use pole_expansion::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn real_rhs(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| C64::new(rng.random::<f64>() - 0.5, 0.0)).collect()
}

fn norm(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn diag_pencil(vals: &[f64]) -> Pencil {
    let t: Vec<_> = vals.iter().enumerate().map(|(i, &v)| (i, i, C64::new(v, 0.0))).collect();
    Pencil::standard(HermitianOperator::sparse(CsrMatrix::from_triplets(vals.len(), &t).unwrap()).unwrap())
}

fn exact_bounds(lambdas: &[f64]) -> (f64, f64) {
    lambdas.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &l| (a.min(l), b.max(l)))
}

#[test]
fn random_pencil_basis_meets_the_sub_solve_tolerance() {
    let sp = gen_random_pencil(100, 0, 100.0, 12).unwrap();
    let bounds = estimate_spectral_bounds(&sp.pencil, 50, 0.05).unwrap();
    let contour = build_contour(bounds, 40).unwrap();
    let b = real_rhs(100, 1);
    for config in [SubSolveConfig::direct(), SubSolveConfig::iterative(SubSolveMethod::IterativeGeneral, 1e-7)] {
        let basis = PoleSolver::new(config.clone()).compute_basis(&sp.pencil, &contour, &b).unwrap();
        assert_eq!(basis.storage(), BasisStorage::Conjugate);
        assert_eq!(basis.vectors().len(), 20);
        assert!(basis.residual_norms().iter().all(|&r| r <= config.tol));
        assert!(basis.flagged().is_empty());
        for (k, h) in basis.vectors().iter().enumerate() {
            let r = sp.pencil.relative_residual(contour.nodes()[k], h, &b);
            assert!((r - basis.residual_norms()[k]).abs() <= 1e-8);
        }
    }
}

#[test]
fn complex_pencil_stores_every_pole() {
    let mut spec = RandomPencil::new(30, 0, 10.0, 4);
    spec.complex = true;
    let sp = spec.generate().unwrap();
    assert!(!sp.pencil.is_real());
    let contour = build_contour(SpectralBounds::new(0.9, 11.0).unwrap(), 16).unwrap();
    let solver = PoleSolver::new(SubSolveConfig::direct());
    let basis = solver.compute_basis(&sp.pencil, &contour, &real_rhs(30, 2)).unwrap();
    assert_eq!(basis.storage(), BasisStorage::Full);
    assert_eq!(basis.vectors().len(), 16);
    assert_eq!(solver.counters().factorizations, 16);
}

#[test]
fn real_pencil_with_complex_rhs_reuses_each_factorization() {
    let sp = gen_random_pencil(30, 0, 10.0, 5).unwrap();
    let contour = build_contour(SpectralBounds::new(0.9, 11.0).unwrap(), 16).unwrap();
    let b: Vec<C64> = real_rhs(30, 3).iter().map(|v| v * C64::new(1.0, 0.5)).collect();
    let solver = PoleSolver::new(SubSolveConfig::direct());
    let basis = solver.compute_basis(&sp.pencil, &contour, &b).unwrap();
    assert_eq!(basis.storage(), BasisStorage::Full);
    assert_eq!(solver.counters().factorizations, 8);
    assert_eq!(solver.counters().basis_solves, 16);
    for k in 0..16 {
        let want = direct_factor(&sp.pencil, contour.nodes()[k]).unwrap().solve(&b);
        let d: Vec<C64> = want.iter().zip(&basis.vectors()[k]).map(|(a, c)| a - c).collect();
        assert!(norm(&d) <= 1e-12 * norm(&want));
    }
}

#[test]
fn conjugate_storage_reconstructs_the_lower_half() {
    let sp = gen_random_pencil(40, 0, 50.0, 6).unwrap();
    let contour = build_contour(SpectralBounds::new(0.9, 55.0).unwrap(), 20).unwrap();
    let b = real_rhs(40, 4);
    let basis = PoleSolver::new(SubSolveConfig::direct()).compute_basis(&sp.pencil, &contour, &b).unwrap();
    for k in 0..10 {
        let upper = basis.pole_solution(k);
        let lower = basis.pole_solution(contour.partner(k));
        assert!(upper.iter().zip(&lower).all(|(u, l)| *l == u.conj()));
        let want = direct_factor(&sp.pencil, contour.nodes()[contour.partner(k)]).unwrap().solve(&b);
        let d: Vec<C64> = want.iter().zip(&lower).map(|(a, c)| a - c).collect();
        assert!(norm(&d) <= 1e-12 * norm(&want));
    }
}

#[test]
fn identity_pencil_at_zero_returns_b() {
    let p = diag_pencil(&[1.0; 6]);
    let contour = build_contour(SpectralBounds::new(0.5, 2.0).unwrap(), 20).unwrap();
    let b = real_rhs(6, 5);
    let (u, _, _) = PoleSolver::new(SubSolveConfig::direct()).solve_many(&p, &contour, &b, &[C64::new(0.0, 0.0)]).unwrap();
    let err = scalar_error_sup(&contour, (0.5, 2.0), C64::new(0.0, 0.0), 1000).unwrap();
    let d: Vec<C64> = u[0].iter().zip(&b).map(|(a, c)| a - c).collect();
    assert!(norm(&d) <= (err + 1e-14) * norm(&b));
}

#[test]
fn real_negative_shift_gives_a_real_solution() {
    let sp = gen_random_pencil(60, 0, 100.0, 8).unwrap();
    let (lo, hi) = exact_bounds(&sp.eig.lambdas);
    let contour = build_contour(SpectralBounds::new(lo, hi).unwrap(), 30).unwrap();
    let b = real_rhs(60, 6);
    for config in [SubSolveConfig::direct(), SubSolveConfig::iterative(SubSolveMethod::IterativeGeneral, 1e-7)] {
        let eps = if config.method == SubSolveMethod::Direct { 0.0 } else { config.tol };
        let solver = PoleSolver::new(config);
        let basis = solver.compute_basis(&sp.pencil, &contour, &b).unwrap();
        for z in [C64::new(-2.0, 0.0), C64::new(0.0, 0.0), C64::new(-40.0, 0.0)] {
            let u = solver.combine(&basis, z).unwrap();
            let im: f64 = u.iter().map(|v| v.im * v.im).sum::<f64>().sqrt();
            let scalar = scalar_error_sup(&contour, (lo, hi), z, 10_000).unwrap();
            assert!(im <= (scalar + 10.0 * eps) * norm(&u), "z = {z}: {im:e}");
        }
    }
}

#[test]
fn toy_hamiltonian_shift_sweep_residuals() {
    let pencil = gen_grid_hamiltonian(&bench_grid(128)).unwrap().to_pencil().unwrap();
    let eig = dense_generalized_eig(&pencil).unwrap();
    let (lo, hi) = exact_bounds(&eig.lambdas);
    let contour = build_contour(SpectralBounds::new(lo, hi).unwrap(), 60).unwrap();
    let b = real_rhs(128, 7);
    let shifts = imaginary_shift_set(101, 10.0);
    let eps = 1e-7;
    let (_, report, _) = PoleSolver::new(SubSolveConfig::iterative(SubSolveMethod::IterativeGeneral, eps))
        .solve_many(&pencil, &contour, &b, &shifts)
        .unwrap();
    for (z, r) in shifts.iter().zip(&report.shift_residuals) {
        let scalar = scalar_error_sup(&contour, (lo, hi), *z, 10_000).unwrap();
        assert!(*r <= scalar.max(10.0 * eps), "z = {z}: {r:e} vs {scalar:e}");
    }
}

#[test]
fn report_residuals_are_recomputed_from_solutions() {
    let sp = gen_random_pencil(50, 0, 30.0, 9).unwrap();
    let contour = build_contour(SpectralBounds::new(0.9, 33.0).unwrap(), 24).unwrap();
    let b = real_rhs(50, 8);
    let shifts = imaginary_shift_set(7, 4.0);
    let (u, report, _) = PoleSolver::new(SubSolveConfig::direct()).solve_many(&sp.pencil, &contour, &b, &shifts).unwrap();
    for l in 0..shifts.len() {
        assert_eq!(report.shift_residuals[l], sp.pencil.relative_residual(shifts[l], &u[l], &b));
    }
    assert_eq!(report.poles, 24);
    assert!(report.basis_seconds >= 0.0 && report.combine_seconds >= 0.0);
}

#[test]
fn single_shift_equals_basis_plus_combine() {
    let sp = gen_random_pencil(40, 0, 20.0, 10).unwrap();
    let contour = build_contour(SpectralBounds::new(0.9, 22.0).unwrap(), 20).unwrap();
    let b = real_rhs(40, 9);
    let z = C64::new(-0.5, 1.5);
    let solver = PoleSolver::new(SubSolveConfig::direct());
    let (u, _, _) = solver.solve_many(&sp.pencil, &contour, &b, &[z]).unwrap();
    let basis = solver.compute_basis(&sp.pencil, &contour, &b).unwrap();
    assert_eq!(u[0], basis.combine(z).unwrap());
}

#[test]
fn new_shifts_reuse_the_stored_basis() {
    let sp = gen_random_pencil(40, 0, 20.0, 11).unwrap();
    let contour = build_contour(SpectralBounds::new(0.9, 22.0).unwrap(), 20).unwrap();
    let b = real_rhs(40, 10);
    let solver = PoleSolver::new(SubSolveConfig::direct());
    let (_, _, basis) = solver.solve_many(&sp.pencil, &contour, &b, &imaginary_shift_set(5, 2.0)).unwrap();
    let before = solver.counters();
    let u = solver.combine(&basis, C64::new(-3.0, 7.0)).unwrap();
    let after = solver.counters();
    assert_eq!(before.basis_solves, after.basis_solves);
    assert_eq!(before.factorizations, after.factorizations);
    assert_eq!(after.combine_calls, before.combine_calls + 1);
    assert_eq!(u, solver.combine(&basis, C64::new(-3.0, 7.0)).unwrap());
}

#[test]
fn saved_basis_answers_new_shifts() {
    let sp = gen_random_pencil(30, 0, 20.0, 12).unwrap();
    let contour = build_contour(SpectralBounds::new(0.9, 22.0).unwrap(), 16).unwrap();
    let b = real_rhs(30, 11);
    let basis = PoleSolver::new(SubSolveConfig::direct()).compute_basis(&sp.pencil, &contour, &b).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("basis.json");
    basis.save(&path).unwrap();
    let loaded = PoleBasis::load(&path).unwrap();
    let z = C64::new(-1.0, -4.0);
    assert_eq!(loaded.combine(z).unwrap(), basis.combine(z).unwrap());
    assert_eq!(loaded.rhs_tag(), basis.rhs_tag());
}

#[test]
fn right_half_plane_shifts_are_rejected() {
    let p = diag_pencil(&[1.0, 2.0]);
    let contour = build_contour(SpectralBounds::new(1.0, 2.0).unwrap(), 8).unwrap();
    let b = real_rhs(2, 0);
    let r = PoleSolver::new(SubSolveConfig::direct()).solve_many(&p, &contour, &b, &[C64::new(1e-3, 1.0)]);
    assert!(matches!(r, Err(Error::InvalidShift(..))));
}

#[test]
fn worker_pool_width_does_not_change_results() {
    let sp = gen_random_pencil(60, 0, 50.0, 13).unwrap();
    let contour = build_contour(SpectralBounds::new(0.9, 55.0).unwrap(), 24).unwrap();
    let b = real_rhs(60, 12);
    let shifts = imaginary_shift_set(5, 3.0);
    let config = SubSolveConfig::iterative(SubSolveMethod::IterativeGeneral, 1e-9);
    let (a, _, _) = PoleSolver::new(config.clone()).with_threads(1).solve_many(&sp.pencil, &contour, &b, &shifts).unwrap();
    let (c, _, _) = PoleSolver::new(config).with_threads(4).solve_many(&sp.pencil, &contour, &b, &shifts).unwrap();
    assert_eq!(a, c);
}

#[test]
fn failed_sub_solves_are_flagged_not_dropped() {
    let sp = gen_random_pencil(60, 0, 1000.0, 14).unwrap();
    let contour = build_contour(SpectralBounds::new(0.9, 1100.0).unwrap(), 20).unwrap();
    let b = real_rhs(60, 13);
    let mut config = SubSolveConfig::iterative(SubSolveMethod::IterativeGeneral, 1e-12);
    config.max_iter = 3;
    let (_, report, basis) = PoleSolver::new(config).solve_many(&sp.pencil, &contour, &b, &[C64::new(0.0, 1.0)]).unwrap();
    assert!(!report.flagged_poles.is_empty());
    assert_eq!(report.flagged_poles, basis.flagged());
    for &k in &report.flagged_poles {
        assert!(basis.residual_norms()[k] > 1e-12);
    }
    assert_eq!(basis.vectors().len(), 10);
}

#[test]
fn multi_rhs_factors_once_and_is_linear() {
    let sp = gen_random_pencil(50, 0, 20.0, 15).unwrap();
    let contour = build_contour(SpectralBounds::new(0.9, 22.0).unwrap(), 20).unwrap();
    let b1 = real_rhs(50, 14);
    let b2: Vec<C64> = b1.iter().map(|v| v * 2.0).collect();
    let shifts = imaginary_shift_set(3, 2.0);
    let solver = PoleSolver::new(SubSolveConfig::direct());
    let out = solver.solve_multi_rhs(&sp.pencil, &contour, &[b1, b2], &shifts, false).unwrap();
    assert_eq!(solver.counters().factorizations, 10);
    assert_eq!(solver.counters().substitutions, 20);
    for (u1, u2) in out.solutions[0].iter().zip(&out.solutions[1]) {
        assert!(u1.iter().zip(u2).all(|(a, c)| *c == a * 2.0));
    }
}

#[test]
fn multi_rhs_requires_direct_solves() {
    let p = diag_pencil(&[1.0, 2.0]);
    let contour = build_contour(SpectralBounds::new(1.0, 2.0).unwrap(), 8).unwrap();
    let config = SubSolveConfig::iterative(SubSolveMethod::IterativeGeneral, 1e-8);
    assert!(PoleSolver::new(config).solve_multi_rhs(&p, &contour, &[real_rhs(2, 0)], &[], false).is_err());
}

#[test]
fn decoupled_indefinite_diagonal() {
    let p = diag_pencil(&[2.0, -1.0]);
    let eig = dense_generalized_eig(&p).unwrap();
    let split = eig.split();
    let contour = build_contour(SpectralBounds::new(2.0, 2.0 + 1e-9).unwrap(), 16).unwrap();
    let b = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let z = C64::new(0.0, 1.0);
    let (u, report) = PoleSolver::new(SubSolveConfig::direct())
        .solve_indefinite(&p, &contour, &split, &b, &[z], false)
        .unwrap();
    let err = scalar_error_sup(&contour, (2.0, 2.0 + 1e-9), z, 100).unwrap();
    assert!((u[0][0] - 1.0 / (2.0 - z)).norm() <= err + 1e-14);
    assert!(u[0][1].norm() <= 1e-14);
    assert!(report.leakage[0] <= 1e-14);
}

#[test]
fn indefinite_rejects_leaky_right_hand_sides() {
    let sp = gen_random_pencil(40, 3, 10.0, 16).unwrap();
    let (lo, hi) = exact_bounds(&sp.split.lambda_plus);
    let contour = build_contour(SpectralBounds::new(lo, hi).unwrap(), 20).unwrap();
    let psi0: Vec<C64> = sp.split.psi_minus.column(0).iter().copied().collect();
    let mut s_psi = vec![C64::new(0.0, 0.0); 40];
    sp.pencil.apply_s(&psi0, &mut s_psi);
    let solver = PoleSolver::new(SubSolveConfig::direct());
    let r = solver.solve_indefinite(&sp.pencil, &contour, &sp.split, &s_psi, &[C64::new(0.0, 1.0)], false);
    assert!(matches!(r, Err(Error::RhsLeakage(l)) if l > 0.5));
    let clean = project_out_rhs(&sp.split.psi_minus, &sp.pencil, &s_psi).unwrap();
    assert!(norm(&clean) <= 1e-12 * norm(&s_psi));
}

#[test]
fn indefinite_contour_must_cover_the_positive_spectrum() {
    let sp = gen_random_pencil(40, 3, 10.0, 17).unwrap();
    let (lo, hi) = exact_bounds(&sp.split.lambda_plus);
    let short = build_contour(SpectralBounds::new(lo, 0.5 * hi).unwrap(), 20).unwrap();
    let b = project_out_rhs(&sp.split.psi_minus, &sp.pencil, &real_rhs(40, 15)).unwrap();
    let r = PoleSolver::new(SubSolveConfig::direct()).solve_indefinite(&sp.pencil, &short, &sp.split, &b, &[], false);
    assert!(matches!(r, Err(Error::Invalid(_))));
}

#[test]
fn indefinite_leakage_tracks_the_basis_leakage() {
    let sp = gen_random_pencil(60, 5, 30.0, 18).unwrap();
    let (lo, hi) = exact_bounds(&sp.split.lambda_plus);
    let contour = build_contour(SpectralBounds::new(lo, hi).unwrap(), 30).unwrap();
    let b = project_out_rhs(&sp.split.psi_minus, &sp.pencil, &real_rhs(60, 16)).unwrap();
    let shifts = imaginary_shift_set(5, 5.0);
    let solver = PoleSolver::new(SubSolveConfig::iterative(SubSolveMethod::IterativeGeneral, 1e-7));
    let psi: &DenseMatrix = &sp.split.psi_minus;
    let basis = solver.compute_basis(&sp.pencil, &contour, &b).unwrap();
    let basis_leak = basis
        .vectors()
        .iter()
        .map(|h| negative_leakage(psi, &sp.pencil, h).unwrap())
        .fold(0.0, f64::max);
    let (_, plain) = solver.solve_indefinite(&sp.pencil, &contour, &sp.split, &b, &shifts, false).unwrap();
    let (_, projected) = solver.solve_indefinite(&sp.pencil, &contour, &sp.split, &b, &shifts, true).unwrap();
    for l in 0..shifts.len() {
        assert!(plain.leakage[l] <= 10.0 * basis_leak.max(1e-15), "{:e} vs {basis_leak:e}", plain.leakage[l]);
        assert!(projected.leakage[l] <= 1e-10);
    }
}
