use num_complex::Complex64 as C64;
use pole_expansion::harness::{gen_random_pencil, RandomPencil};
use pole_expansion::lanczos::{multishift_solve, LanczosConfig, LanczosVariant};
use pole_expansion::linalg::DenseMatrix;
use pole_expansion::pencil::{negative_leakage, project_out_rhs, HermitianOperator, Pencil};
use pole_expansion::sparse::CsrMatrix;
use pole_expansion::subsolve::direct_factor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VARIANTS: [LanczosVariant; 2] = [LanczosVariant::CgStyle, LanczosVariant::MinresStyle];

fn random_rhs(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect()
}

fn rel_diff(a: &[C64], b: &[C64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    d / nb
}

fn imaginary_shifts(count: usize, span: f64) -> Vec<C64> {
    (0..count)
        .map(|i| C64::new(0.0, -span + 2.0 * span * i as f64 / (count - 1) as f64))
        .collect()
}

#[test]
fn matches_dense_direct_solves() {
    let tol = 1e-8;
    let shifts = imaginary_shifts(11, 10.0);
    for seed in 0..4 {
        let sp = gen_random_pencil(100, 0, 100.0, 40 + seed).unwrap();
        let b = random_rhs(100, seed);
        for variant in VARIANTS {
            let r = multishift_solve(&sp.pencil, &b, &shifts, &[tol], &LanczosConfig::with_variant(variant), None).unwrap();
            assert!(r.all_converged(), "{variant:?}: {:?}", r.residuals);
            for (z, x) in shifts.iter().zip(&r.solutions) {
                let want = direct_factor(&sp.pencil, *z).unwrap().solve(&b);
                let d = rel_diff(x, &want);
                assert!(d <= 10.0 * tol, "seed {seed} {variant:?} z = {z}: {d:e}");
            }
        }
    }
}

#[test]
fn one_krylov_space_serves_every_shift() {
    let tol = 1e-9;
    let sp = gen_random_pencil(80, 0, 50.0, 7).unwrap();
    let b = random_rhs(80, 1);
    let shifts = vec![C64::new(0.0, 0.5), C64::new(-2.0, 3.0), C64::new(-0.5, -8.0)];
    for variant in VARIANTS {
        let multi = multishift_solve(&sp.pencil, &b, &shifts, &[tol], &LanczosConfig::with_variant(variant), None).unwrap();
        for (l, z) in shifts.iter().enumerate() {
            let cfg = LanczosConfig {
                max_iter: Some(multi.shift_iterations[l]),
                ..LanczosConfig::with_variant(variant)
            };
            let single = multishift_solve(&sp.pencil, &b, &[*z], &[1e-300], &cfg, None).unwrap();
            assert_eq!(single.iterations, multi.shift_iterations[l]);
            let d = rel_diff(&multi.solutions[l], &single.solutions[0]);
            assert!(d <= 10.0 * tol, "{variant:?} shift {l}: {d:e}");
        }
    }
}

#[test]
fn recurrence_residual_tracks_the_true_residual() {
    let mut spec = RandomPencil::new(120, 0, 1e3, 3);
    spec.identity_overlap = true;
    let sp = spec.generate().unwrap();
    let b = random_rhs(120, 2);
    let shifts = [C64::new(0.0, 0.3), C64::new(-1.0, 2.0)];
    for variant in VARIANTS {
        for k in [5, 10, 20, 40] {
            let cfg = LanczosConfig {
                max_iter: Some(k),
                log: true,
                drift_check_every: 0,
                ..LanczosConfig::with_variant(variant)
            };
            let r = multishift_solve(&sp.pencil, &b, &shifts, &[1e-300], &cfg, None).unwrap();
            for l in 0..shifts.len() {
                let last = r.log.iter().rfind(|e| e.shift_index == l).unwrap();
                assert_eq!(last.k, k);
                let rel = (last.residual - r.residuals[l]).abs() / r.residuals[l];
                assert!(rel <= 1e-6, "{variant:?} k={k} shift {l}: {} vs {}", last.residual, r.residuals[l]);
            }
        }
    }
}

#[test]
fn tridiagonal_entries_are_real_and_positive() {
    let sp = gen_random_pencil(60, 0, 20.0, 11).unwrap();
    let b = random_rhs(60, 5);
    let r = multishift_solve(&sp.pencil, &b, &[C64::new(0.0, 1.0)], &[1e-10], &LanczosConfig::default(), None).unwrap();
    assert!(r.betas[..r.betas.len() - 1].iter().all(|&v| v > 0.0));
    assert!(r.alphas.iter().all(|a| a.is_finite()));
}

#[test]
fn per_shift_work_is_linear_in_the_shift_count() {
    let mut slopes = Vec::new();
    for n in [100, 200] {
        let sp = gen_random_pencil(n, 0, 10.0, 1).unwrap();
        let b = random_rhs(n, 3);
        let cfg = LanczosConfig {
            max_iter: Some(30),
            drift_check_every: 0,
            ..LanczosConfig::default()
        };
        let ops: Vec<f64> = [1usize, 4, 16]
            .iter()
            .map(|&nz| {
                let shifts = imaginary_shifts(nz.max(2), 5.0)[..nz].to_vec();
                let r = multishift_solve(&sp.pencil, &b, &shifts, &[1e-300], &cfg, None).unwrap();
                assert_eq!(r.counters.operator_applications, 30);
                r.counters.shift_vector_ops as f64
            })
            .collect();
        let s1 = (ops[1] - ops[0]) / 3.0;
        let s2 = (ops[2] - ops[1]) / 12.0;
        assert!((s1 - s2).abs() <= 1e-12 * s1);
        slopes.push(s1);
    }
    assert_eq!(slopes[0], slopes[1]);
}

#[test]
fn lucky_breakdown_is_exact() {
    let vals: Vec<f64> = (1..=20).map(f64::from).collect();
    let t: Vec<_> = vals.iter().enumerate().map(|(i, &v)| (i, i, C64::new(v, 0.0))).collect();
    let p = Pencil::standard(HermitianOperator::sparse(CsrMatrix::from_triplets(20, &t).unwrap()).unwrap());
    let mut b = vec![C64::new(0.0, 0.0); 20];
    b[0] = C64::new(1.0, 0.0);
    b[7] = C64::new(2.0, 0.0);
    let r = multishift_solve(&p, &b, &[C64::new(0.0, 1.0), C64::new(-3.0, 0.0)], &[1e-13], &LanczosConfig::default(), None).unwrap();
    assert!(r.breakdown);
    assert_eq!(r.iterations, 2);
    assert!(r.all_converged());
}

fn indefinite_setup() -> (pole_expansion::harness::SyntheticPencil, Vec<C64>) {
    let sp = gen_random_pencil(60, 5, 30.0, 21).unwrap();
    let b = project_out_rhs(&sp.split.psi_minus, &sp.pencil, &random_rhs(60, 8)).unwrap();
    (sp, b)
}

#[test]
fn projection_is_harmless_for_clean_right_hand_sides() {
    let (sp, b) = indefinite_setup();
    let shifts = imaginary_shifts(5, 4.0);
    for variant in VARIANTS {
        let cfg = LanczosConfig::with_variant(variant);
        let off = multishift_solve(&sp.pencil, &b, &shifts, &[1e-10], &cfg, None).unwrap();
        let on = multishift_solve(&sp.pencil, &b, &shifts, &[1e-10], &cfg, Some(&sp.split.psi_minus)).unwrap();
        for l in 0..shifts.len() {
            let d = rel_diff(&on.solutions[l], &off.solutions[l]);
            assert!(d <= 1e-6, "{variant:?} shift {l}: {d:e}");
            let leak = negative_leakage(&sp.split.psi_minus, &sp.pencil, &on.solutions[l]).unwrap();
            assert!(leak <= 1e-8, "{leak:e}");
        }
    }
}

#[test]
fn projection_removes_an_injected_component() {
    let (sp, b) = indefinite_setup();
    let mut dirty = b.clone();
    let mut s_psi = vec![C64::new(0.0, 0.0); 60];
    let psi0: Vec<C64> = sp.split.psi_minus.column(0).iter().copied().collect();
    sp.pencil.apply_s(&psi0, &mut s_psi);
    for (d, s) in dirty.iter_mut().zip(&s_psi) {
        *d += 0.5 * s;
    }
    let shifts = imaginary_shifts(3, 2.0);
    let r = multishift_solve(&sp.pencil, &dirty, &shifts, &[1e-10], &LanczosConfig::default(), Some(&sp.split.psi_minus)).unwrap();
    for x in &r.solutions {
        assert!(negative_leakage(&sp.split.psi_minus, &sp.pencil, x).unwrap() <= 1e-8);
    }
    // the solved system is the clean one
    let clean = multishift_solve(&sp.pencil, &b, &shifts, &[1e-10], &LanczosConfig::default(), None).unwrap();
    for (a, c) in r.solutions.iter().zip(&clean.solutions) {
        assert!(rel_diff(a, c) <= 1e-6);
    }
}

#[test]
fn empty_projection_basis_is_a_no_op() {
    let sp = gen_random_pencil(40, 0, 10.0, 2).unwrap();
    let b = random_rhs(40, 9);
    let empty = DenseMatrix::zeros(40, 0);
    let shifts = imaginary_shifts(3, 3.0);
    let a = multishift_solve(&sp.pencil, &b, &shifts, &[1e-9], &LanczosConfig::default(), None).unwrap();
    let c = multishift_solve(&sp.pencil, &b, &shifts, &[1e-9], &LanczosConfig::default(), Some(&empty)).unwrap();
    assert_eq!(a.solutions, c.solutions);
}

#[test]
fn full_reorthogonalization_does_not_change_the_answer() {
    let sp = gen_random_pencil(70, 0, 100.0, 4).unwrap();
    let b = random_rhs(70, 10);
    let shifts = imaginary_shifts(3, 5.0);
    let cfg = LanczosConfig {
        full_reorthogonalization: true,
        ..LanczosConfig::default()
    };
    let a = multishift_solve(&sp.pencil, &b, &shifts, &[1e-9], &LanczosConfig::default(), None).unwrap();
    let c = multishift_solve(&sp.pencil, &b, &shifts, &[1e-9], &cfg, None).unwrap();
    assert!(c.all_converged());
    assert!(c.iterations <= a.iterations);
    for (x, y) in a.solutions.iter().zip(&c.solutions) {
        assert!(rel_diff(x, y) <= 1e-7);
    }
}
