use dbfock::levelset::d_eps;
use dbfock::{Complex64, HermiteBiehlerModel, KernelEval, WeightField};
use proptest::prelude::*;
use std::f64::consts::PI;

fn zeros() -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-8.0..8.0f64, 0.05..4.0f64).prop_map(|(x, y)| Complex64::new(x, y)), 1..12)
}

fn upper() -> impl Strategy<Value = Complex64> {
    (-10.0..10.0f64, 1e-3..5.0f64).prop_map(|(x, y)| Complex64::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn theta_is_inner(zs in zeros(), a in 0.0..2.0f64, z in upper()) {
        let m = HermiteBiehlerModel::finite(zs, a).unwrap();
        prop_assert!(m.log_abs_theta(z).unwrap() < 0.0);
        prop_assert!(m.phase_derivative(z.re).unwrap() > 0.0);
    }

    #[test]
    fn diagonal_kernel_matches_theta(zs in zeros(), z in upper()) {
        let m = HermiteBiehlerModel::finite(zs, 0.5).unwrap();
        let k = KernelEval::new(&m).knorm2(z).unwrap();
        let want = m.one_minus_abs_theta_sq(z).unwrap() / (4.0 * PI * z.im);
        prop_assert!(k > 0.0);
        prop_assert!((k - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn theta_modulus_is_covariant(zs in zeros(), z in upper(), c in -5.0..5.0f64, s in 0.2..5.0f64) {
        let base = HermiteBiehlerModel::finite(zs.clone(), 0.0).unwrap().log_abs_theta(z).unwrap();
        let moved: Vec<Complex64> = zs.iter().map(|w| s * w + c).collect();
        let m = HermiteBiehlerModel::finite(moved, 0.0).unwrap();
        let v = m.log_abs_theta(s * z + c).unwrap();
        prop_assert!((v - base).abs() <= 1e-9 * (1.0 + base.abs()));
    }

    #[test]
    fn weights_are_positive_and_even(zs in zeros(), z in upper()) {
        let m = HermiteBiehlerModel::finite(zs, 0.0).unwrap();
        for w in [WeightField::w0(&m), WeightField::w2(&m), WeightField::one2(&m)] {
            let r = w.relative(z).unwrap();
            prop_assert!(r > 0.0 && r.is_finite());
            prop_assert_eq!(r, w.relative(z.conj()).unwrap());
        }
    }

    #[test]
    fn distance_shrinks_as_eps_grows(zs in zeros(), x in -6.0..6.0f64, y in 0.5..4.0f64, e1 in 0.05..0.45f64) {
        let m = HermiteBiehlerModel::finite(zs, 0.0).unwrap();
        let z = Complex64::new(x, y);
        let e2 = e1 + 0.4;
        let (d1, d2) = (d_eps(&m, z, e1).unwrap(), d_eps(&m, z, e2).unwrap());
        prop_assert!(d2.value <= d1.value * (1.0 + 1e-8) + 1e-10);
        prop_assert!(d1.lo <= d1.value && d1.value <= d1.hi);
    }

    #[test]
    fn evaluation_is_deterministic(zs in zeros(), z in upper()) {
        let m1 = HermiteBiehlerModel::finite(zs.clone(), 0.3).unwrap();
        let m2 = HermiteBiehlerModel::finite(zs, 0.3).unwrap();
        prop_assert_eq!(m1.eval_e(z).unwrap(), m2.eval_e(z).unwrap());
        prop_assert_eq!(d_eps(&m1, z, 0.2).unwrap().value, d_eps(&m2, z, 0.2).unwrap().value);
    }
}
