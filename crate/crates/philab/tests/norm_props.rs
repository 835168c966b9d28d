//! Property tests for the Luxemburg norm and the power sandwiches.

use philab::nfunction::{NFunction, NFunctionFamily};
use philab::norms::{luxemburg_norm, modular};
use philab::{Field, Mesh};
use proptest::prelude::*;

fn mesh() -> Mesh {
    Mesh::interval(0.0, 1.0, 24).unwrap()
}

fn power_sum() -> NFunction {
    NFunction::from_family(NFunctionFamily::PowerSum { p: 1.5, q: 1.8 }, 2).unwrap()
}

fn field_strategy() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-3.0..3.0f64, 25)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn luxemburg_absolutely_homogeneous(values in field_strategy(), c in 0.05..20.0f64) {
        let m = mesh();
        let nf = power_sum();
        let u = Field::new(&m, values).unwrap();
        let scaled = Field::new(&m, u.values().iter().map(|v| c * v).collect()).unwrap();
        let a = luxemburg_norm(&u, &nf, &m).unwrap();
        let b = luxemburg_norm(&scaled, &nf, &m).unwrap();
        prop_assert!((b - c * a).abs() <= 1e-8 * (c * a).max(1e-12));
    }

    #[test]
    fn luxemburg_triangle_inequality(xs in field_strategy(), ys in field_strategy()) {
        let m = mesh();
        let nf = power_sum();
        let u = Field::new(&m, xs).unwrap();
        let v = Field::new(&m, ys).unwrap();
        let sum = Field::new(
            &m,
            u.values().iter().zip(v.values()).map(|(a, b)| a + b).collect(),
        )
        .unwrap();
        let nu = luxemburg_norm(&u, &nf, &m).unwrap();
        let nv = luxemburg_norm(&v, &nf, &m).unwrap();
        let ns = luxemburg_norm(&sum, &nf, &m).unwrap();
        prop_assert!(ns <= nu + nv + 1e-8 * (nu + nv).max(1.0));
    }

    #[test]
    fn norm_modular_sandwich_random_fields(values in field_strategy()) {
        let m = mesh();
        let nf = power_sum();
        let u = Field::new(&m, values).unwrap();
        let lux = luxemburg_norm(&u, &nf, &m).unwrap();
        if lux > 0.0 {
            let md = modular(&u, &nf, &m).unwrap();
            let tol = 1e-7 * md.max(1e-12);
            prop_assert!(nf.zeta0(lux) <= md + tol);
            prop_assert!(md <= nf.zeta1(lux) + tol);
        }
    }

    #[test]
    fn luxemburg_matches_lp_for_pure_power(values in field_strategy(), p in 1.2..3.5f64) {
        let m = mesh();
        let nf = NFunction::power(p, 5).unwrap().scaled(p).unwrap();
        let u = Field::new(&m, values).unwrap();
        let lux = luxemburg_norm(&u, &nf, &m).unwrap();
        let lp = philab::norms::lp_norm(&u, &m, p).unwrap();
        prop_assert!((lux - lp).abs() <= 1e-9 * lp.max(1e-12));
    }

    #[test]
    fn zeta_sandwich_random(rho in 1e-3..10.0f64, t in 1e-3..10.0f64) {
        let nf = power_sum();
        prop_assert!(nf.zeta_bounds_check(rho, t).unwrap());
        let pl = NFunction::from_family(
            NFunctionFamily::Plasticity { alpha: 2.0, beta: 1.0 }, 4).unwrap();
        prop_assert!(pl.zeta_bounds_check(rho, t).unwrap());
    }
}
