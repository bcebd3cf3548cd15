use proptest::prelude::*;
use tau2_core::rk_matrices::r_matrix;
use tau2_core::tensorkit::{
    circle_points, laurent_fit, poly_from_roots, poly_roots, reexpansion_residual, rel_diff, LaurentCurve,
    LaurentShape, OperatorMatrix,
};
use tau2_core::tq_solver::{lambda_from_w, q_from_roots};
use tau2_core::weyl_model::check_p;
use tau2_core::{Error, ModelConfig, C64};

fn cplx(lo: f64, hi: f64) -> impl Strategy<Value = C64> {
    (lo..hi, lo..hi).prop_map(|(a, b)| C64::new(a, b))
}

fn eta(p: usize) -> C64 {
    C64::new(0.0, 2.0 * std::f64::consts::PI / p as f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn laurent_fit_recovers_coefficients(coeffs in prop::collection::vec(cplx(-2.0, 2.0), 7), x in -0.3f64..0.3) {
        let curve = LaurentCurve::new(2, -3, coeffs).unwrap();
        let fit_u = circle_points(11, 2, x, 0.2);
        let held_u = circle_points(3, 2, -x, 0.7);
        let s = |us: &[C64]| us.iter().map(|&u| (u, curve.eval(u))).collect::<Vec<_>>();
        let fit = laurent_fit(&s(&fit_u), &s(&held_u), LaurentShape::symmetric(2, 3), 1e-9).unwrap();
        prop_assert!(fit.curve.rel_distance(&curve) < 1e-10);
        prop_assert!(fit.held_out_residual < 1e-12);
    }

    #[test]
    fn polynomial_roots_reexpand(roots in prop::collection::vec(cplx(-1.5, 1.5), 2..9), lead in cplx(0.5, 2.0)) {
        let coeffs = poly_from_roots(&roots, lead);
        let found = poly_roots(&coeffs).unwrap();
        prop_assert_eq!(found.len(), roots.len());
        prop_assert!(reexpansion_residual(&coeffs, &found) < 1e-9);
    }

    #[test]
    fn q_is_invariant_under_root_reflection(
        roots in prop::collection::vec(cplx(-1.0, 1.0), 1..8),
        k in 0usize..8,
        u in cplx(-0.5, 0.5),
    ) {
        let e = eta(3);
        let k = k % roots.len();
        let q = q_from_roots(roots.iter().copied(), u, e);
        let flipped = q_from_roots(roots.iter().enumerate().map(|(i, &l)| if i == k { -l - e } else { l }), u, e);
        prop_assert!((q - flipped).norm() <= 1e-12 * q.norm().max(1e-300));
    }

    #[test]
    fn lambda_from_w_inverts_w(w in cplx(-3.0, 3.0)) {
        let e = eta(5);
        let (l, _) = lambda_from_w(w, e);
        prop_assert!(((l * 2.0 + e).cosh() - w).norm() < 1e-10 * w.norm().max(1.0));
        prop_assert!(l.re >= -1e-12);
    }

    #[test]
    fn r_matrix_unitarity(u in cplx(-0.7, 0.7), p in prop::sample::select(vec![3usize, 5, 7])) {
        let e = eta(p);
        let prod = &r_matrix(u, e) * &r_matrix(-u, e);
        let rho = -(u + e).sinh() * (u - e).sinh();
        prop_assert!(rel_diff(&prod, &OperatorMatrix::scalar(rho, &[2, 2])) < 1e-12);
    }

    #[test]
    fn generated_configs_respect_site_constraint(seed in any::<u64>(), n in 1usize..4) {
        let cfg = ModelConfig::generate(3, n, seed).unwrap();
        prop_assert_eq!(cfg.n_sites(), n);
        for s in cfg.sites() {
            prop_assert!(s.constraint_residual() < 1e-12);
        }
        prop_assert!(cfg.root_of_unity_residual() < 1e-12);
        prop_assert_eq!(ModelConfig::generate(3, n, seed).unwrap(), cfg);
    }

    #[test]
    fn only_odd_p_from_three(p in 0usize..40) {
        match check_p(p) {
            Ok(()) => prop_assert!(p >= 3 && p % 2 == 1),
            Err(e) => prop_assert_eq!(e, Error::InvalidP(p)),
        }
    }
}
