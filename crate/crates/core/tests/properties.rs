use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64 as C64;
use pole_expansion::contour::{build_contour, scalar_error_sup, PoleContour, SpectralBounds};
use pole_expansion::elliptic::{complete_k, jacobi_sn_cn_dn};
use pole_expansion::harness::RandomPencil;
use pole_expansion::pencil::{
    dense_generalized_eig, estimate_spectral_bounds, negative_leakage, project_out, s_norm,
};
use pole_expansion::pole::PoleSolver;
use pole_expansion::subsolve::SubSolveConfig;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rhs(n: usize, seed: u64, complex: bool) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let im = if complex { rng.random::<f64>() - 0.5 } else { 0.0 };
            C64::new(rng.random::<f64>() - 0.5, im)
        })
        .collect()
}

fn norm(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// `K(k)` by the trapezoid rule on the periodic integrand.
fn complete_k_quadrature(k: f64) -> f64 {
    let m = 4000;
    let h = FRAC_PI_2 / m as f64;
    let f = |t: f64| 1.0 / (1.0 - (k * t.sin()).powi(2)).sqrt();
    h * (0.5 * f(0.0) + (1..m).map(|i| f(i as f64 * h)).sum::<f64>() + 0.5 * f(FRAC_PI_2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn complete_integral_matches_quadrature(k in 0.0f64..0.95) {
        let want = complete_k_quadrature(k);
        prop_assert!((complete_k(k).unwrap() - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn jacobi_identities_hold(k in 0.0f64..0.999, re in -3.0f64..3.0, im in -1.0f64..1.0) {
        let (sn, cn, dn) = jacobi_sn_cn_dn(C64::new(re, im), k).unwrap();
        let one = C64::new(1.0, 0.0);
        let scale = 1.0 + sn.norm_sqr() + cn.norm_sqr() + dn.norm_sqr();
        prop_assert!((sn * sn + cn * cn - one).norm() <= 1e-11 * scale);
        prop_assert!((dn * dn + k * k * sn * sn - one).norm() <= 1e-11 * scale);
    }

    #[test]
    fn real_argument_gives_real_values(k in 0.0f64..0.999, t in -4.0f64..4.0) {
        let (sn, cn, dn) = jacobi_sn_cn_dn(C64::new(t, 0.0), k).unwrap();
        prop_assert!(sn.im.abs() <= 1e-14 && cn.im.abs() <= 1e-14 && dn.im.abs() <= 1e-14);
        prop_assert!(sn.re.abs() <= 1.0 + 1e-14 && dn.re > 0.0);
    }

    #[test]
    fn contour_is_conjugate_closed_and_off_the_interval(
        lower in 0.01f64..10.0,
        log_ratio in 0.2f64..5.0,
        half in 1usize..60,
    ) {
        let upper = lower * 10f64.powf(log_ratio);
        let c = build_contour(SpectralBounds::new(lower, upper).unwrap(), 2 * half).unwrap();
        prop_assert_eq!(c.poles(), 2 * half);
        for j in 0..c.poles() {
            let p = c.partner(j);
            prop_assert_eq!(c.partner(p), j);
            prop_assert!((c.nodes()[p] - c.nodes()[j].conj()).norm() <= 1e-12 * c.nodes()[j].norm());
            prop_assert!((c.weights()[p] - c.weights()[j].conj()).norm() <= 1e-12 * c.weights()[j].norm());
        }
        prop_assert!(c.min_distance_to_interval() > 0.0);
        let back = PoleContour::from_json(&c.to_json().unwrap()).unwrap();
        prop_assert_eq!(back.nodes(), c.nodes());
    }

    #[test]
    fn more_poles_never_hurt_much(lower in 0.1f64..5.0, log_ratio in 0.5f64..3.0, half in 2usize..20) {
        let upper = lower * 10f64.powf(log_ratio);
        let b = SpectralBounds::new(lower, upper).unwrap();
        let z = C64::new(0.0, 1.0);
        let e1 = scalar_error_sup(&build_contour(b, 2 * half).unwrap(), (lower, upper), z, 500).unwrap();
        let e2 = scalar_error_sup(&build_contour(b, 4 * half).unwrap(), (lower, upper), z, 500).unwrap();
        prop_assert!(e2 <= e1.max(1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn cholesky_reproduces_the_overlap(n in 3usize..40, seed in any::<u64>(), complex in any::<bool>()) {
        let mut spec = RandomPencil::new(n, 0, 10.0, seed);
        spec.complex = complex;
        let sp = spec.generate().unwrap();
        let x = rhs(n, seed ^ 1, true);
        // x* S x = ‖R x‖²
        let mut sx = vec![C64::new(0.0, 0.0); n];
        sp.pencil.apply_s(&x, &mut sx);
        let quad: C64 = x.iter().zip(&sx).map(|(a, b)| a.conj() * b).sum();
        let rx = sp.pencil.apply_r(&x);
        prop_assert!((quad.re - norm(&rx).powi(2)).abs() <= 1e-11 * quad.re);
        prop_assert!(quad.im.abs() <= 1e-11 * quad.re);
        let back = sp.pencil.back_transform(&rx);
        let d: Vec<C64> = back.iter().zip(&x).map(|(a, b)| a - b).collect();
        prop_assert!(norm(&d) <= 1e-11 * norm(&x));
    }

    #[test]
    fn eigen_oracle_recovers_the_synthesized_spectrum(
        n in 5usize..40,
        frac in 0.0f64..0.5,
        seed in any::<u64>(),
        complex in any::<bool>(),
    ) {
        let n_neg = (frac * n as f64) as usize;
        let mut spec = RandomPencil::new(n, n_neg, 50.0, seed);
        spec.complex = complex;
        let sp = spec.generate().unwrap();
        let mut want = spec.spectrum();
        want.sort_by(|a, b| b.total_cmp(a));
        let eig = dense_generalized_eig(&sp.pencil).unwrap();
        for (got, w) in eig.lambdas.iter().zip(&want) {
            prop_assert!((got - w).abs() <= 1e-8 * w.abs().max(1.0));
        }
        let split = eig.split();
        prop_assert_eq!(split.m_pos, n - n_neg);
        prop_assert_eq!(split.psi_minus.ncols(), n_neg);
    }

    #[test]
    fn s_projection_is_idempotent(n in 8usize..40, seed in any::<u64>()) {
        let n_neg = 1 + (seed % 4) as usize;
        let sp = RandomPencil::new(n, n_neg, 20.0, seed).generate().unwrap();
        let psi = &sp.split.psi_minus;
        let x = rhs(n, seed ^ 7, true);
        let once = project_out(psi, &sp.pencil, &x).unwrap();
        let twice = project_out(psi, &sp.pencil, &once).unwrap();
        let d: Vec<C64> = once.iter().zip(&twice).map(|(a, b)| a - b).collect();
        prop_assert!(s_norm(&sp.pencil, &d) <= 1e-12 * s_norm(&sp.pencil, &x));
        prop_assert!(negative_leakage(psi, &sp.pencil, &once).unwrap() <= 1e-12);
        prop_assert!(s_norm(&sp.pencil, &once) <= s_norm(&sp.pencil, &x) * (1.0 + 1e-12));
    }

    #[test]
    fn estimated_bounds_contain_the_spectrum(n in 2usize..50, cond in 1.5f64..1e3, seed in any::<u64>()) {
        let spec = RandomPencil::new(n, 0, cond, seed);
        let sp = spec.generate().unwrap();
        let b = estimate_spectral_bounds(&sp.pencil, 50, 0.05).unwrap();
        for l in spec.spectrum() {
            prop_assert!(b.contains(l), "{l} not in [{}, {}]", b.lower(), b.upper());
        }
    }

    #[test]
    fn exact_basis_error_is_controlled_by_the_scalar_error(
        n in 5usize..40,
        cond in 2.0f64..200.0,
        half in 5usize..20,
        seed in any::<u64>(),
        eta in -10.0f64..10.0,
        re in -5.0f64..0.0,
    ) {
        let spec = RandomPencil::new(n, 0, cond, seed);
        let sp = spec.generate().unwrap();
        let contour = build_contour(SpectralBounds::new(1.0, cond).unwrap(), 2 * half).unwrap();
        let b = rhs(n, seed ^ 3, seed % 2 == 0);
        let z = C64::new(re, eta);
        let basis = PoleSolver::new(SubSolveConfig::direct()).compute_basis(&sp.pencil, &contour, &b).unwrap();
        let u_p = basis.combine(z).unwrap();
        let u = sp.eig.resolvent_solve(z, &b);
        let d: Vec<C64> = u.iter().zip(&u_p).map(|(a, c)| a - c).collect();
        let psi_b = (sp.eig.psi.adjoint() * pole_expansion::linalg::DenseMatrix::from_column_slice(n, 1, &b)).norm();
        let scalar = scalar_error_sup(&contour, (1.0, cond), z, 10_000).unwrap();
        prop_assert!(s_norm(&sp.pencil, &d) / psi_b <= 2.0 * scalar.max(1e-13));
    }

    #[test]
    fn combination_is_linear_and_repeatable(n in 4usize..30, seed in any::<u64>(), eta in -5.0f64..5.0) {
        let sp = RandomPencil::new(n, 0, 20.0, seed).generate().unwrap();
        let contour = build_contour(SpectralBounds::new(0.9, 22.0).unwrap(), 16).unwrap();
        let b = rhs(n, seed ^ 5, false);
        let b4: Vec<C64> = b.iter().map(|v| v * 4.0).collect();
        let solver = PoleSolver::new(SubSolveConfig::direct());
        let basis = solver.compute_basis(&sp.pencil, &contour, &b).unwrap();
        let basis4 = solver.compute_basis(&sp.pencil, &contour, &b4).unwrap();
        let z = C64::new(-0.25, eta);
        let u = basis.combine(z).unwrap();
        prop_assert_eq!(&u, &basis.combine(z).unwrap());
        let u4 = basis4.combine(z).unwrap();
        prop_assert!(u.iter().zip(&u4).all(|(a, c)| *c == a * 4.0));
    }
}
