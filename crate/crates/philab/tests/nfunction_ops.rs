//! Oracle-backed tests for the scalar Orlicz calculus.

use philab::nfunction::{
    default_grid, equivalence_check, log_grid, power_equivalence, GeneratorTable, NFunction,
    NFunctionFamily,
};
use philab::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn power(p: f64, n: u32) -> NFunction {
    NFunction::power(p, n).unwrap()
}

fn power_sum(p: f64, q: f64, n: u32) -> NFunction {
    NFunction::from_family(NFunctionFamily::PowerSum { p, q }, n).unwrap()
}

fn plasticity(alpha: f64, beta: f64, n: u32) -> NFunction {
    NFunction::from_family(NFunctionFamily::Plasticity { alpha, beta }, n).unwrap()
}

/// Composite-trapezoid reference integration of `s phi(s)` on `[0, t]`.
fn trapezoid_oracle(nf: &NFunction, t: f64, panels: usize) -> f64 {
    let h = t / panels as f64;
    let mut sum = 0.5 * (nf.big_phi_prime(0.0) + nf.big_phi_prime(t));
    for i in 1..panels {
        sum += nf.big_phi_prime(h * i as f64);
    }
    sum * h
}

#[test]
fn big_phi_power_values() {
    // Phi(t) = t^p/p
    assert!((power(2.0, 3).big_phi(1.0).unwrap() - 0.5).abs() < 1e-15);
    let v = power(3.0, 4).big_phi(2.0).unwrap();
    assert!((v - 8.0 / 3.0).abs() < 1e-14, "got {v}");
    assert_eq!(power(2.0, 3).big_phi(0.0).unwrap(), 0.0);
}

#[test]
fn big_phi_rejects_bad_argument() {
    let nf = power(2.0, 3);
    assert!(nf.big_phi(-1.0).is_err());
    assert!(nf.big_phi(f64::INFINITY).is_err());
}

#[test]
fn big_phi_plasticity_matches_trapezoid_oracle() {
    let nf = plasticity(2.0, 1.0, 4);
    let oracle = trapezoid_oracle(&nf, 1.0, 1_000_000);
    let v = nf.big_phi(1.0).unwrap();
    assert!((v - oracle).abs() < 1e-8, "closed {v} vs oracle {oracle}");
    // and the closed form itself is t^alpha ln(1+t)^beta
    assert!((v - 2f64.ln()).abs() < 1e-14);
}

#[test]
fn big_phi_quadrature_path_matches_trapezoid_oracle() {
    // the generalized-Newtonian family has no closed Phi; its quadrature
    // must agree with a 1e6-panel trapezoid reference
    let nf = NFunction::from_family(NFunctionFamily::NewtonianFluid { alpha: 0.5, beta: 1.0 }, 3)
        .unwrap();
    for &t in &[0.3, 1.0, 4.7] {
        let oracle = trapezoid_oracle(&nf, t, 1_000_000);
        let v = nf.big_phi(t).unwrap();
        assert!(
            (v - oracle).abs() < 1e-8 * oracle.max(1.0),
            "t={t}: quad {v} vs oracle {oracle}"
        );
    }
}

#[test]
fn check_conditions_power_two() {
    let nf = power(2.0, 3);
    let rep = nf.check_conditions(&default_grid()).unwrap();
    assert!(rep.passed(), "{rep:?}");
    // the growth ratio is identically p - 1 = 1
    assert!((rep.ratio_min - 1.0).abs() < 1e-9);
    assert!((rep.ratio_max - 1.0).abs() < 1e-9);
}

#[test]
fn check_conditions_power_sum() {
    let nf = power_sum(2.0, 3.0, 4);
    let rep = nf.check_conditions(&default_grid()).unwrap();
    assert!(rep.passed(), "{rep:?}");
    assert!(rep.ratio_min >= 1.0 - 1e-6 && rep.ratio_max <= 2.0 + 1e-6);
}

#[test]
fn check_conditions_rejects_constant_flux() {
    // phi(t) = 1/t makes t*phi(t) constant: strict monotonicity fails
    let grid = log_grid(1e-8, 1e8, 64);
    let phis: Vec<f64> = grid.iter().map(|&t| 1.0 / t).collect();
    let table = GeneratorTable::new(grid.clone(), phis).unwrap();
    let nf = NFunction::from_table(table, 3).unwrap();
    let rep = nf.check_conditions(&grid).unwrap();
    assert!(!rep.strictly_increasing);
    assert!(!rep.passed());
}

#[test]
fn check_conditions_grid_validation() {
    let nf = power(2.0, 3);
    assert!(matches!(
        nf.check_conditions(&log_grid(1e-8, 1e8, 32)),
        Err(Error::InvalidArgument(_))
    ));
    let mut unsorted = log_grid(1e-8, 1e8, 64);
    unsorted.swap(10, 20);
    assert!(nf.check_conditions(&unsorted).is_err());
    // narrow span
    assert!(nf.check_conditions(&log_grid(0.1, 10.0, 64)).is_err());
}

#[test]
fn simonenko_power_is_exact() {
    let nf = power(3.0, 4);
    let (l, m) = nf.simonenko_indices(&default_grid()).unwrap();
    assert_eq!((l, m), (3.0, 3.0));
}

#[test]
fn simonenko_power_sum() {
    let nf = power_sum(2.0, 3.0, 4);
    let (l, m) = nf.simonenko_indices(&default_grid()).unwrap();
    assert!((l - 2.0).abs() < 1e-6 && (m - 3.0).abs() < 1e-6);
}

#[test]
fn simonenko_plasticity() {
    let nf = plasticity(2.0, 1.0, 4);
    let (l, m) = nf.simonenko_indices(&default_grid()).unwrap();
    assert!((l - 2.0).abs() < 1e-3 && (m - 3.0).abs() < 1e-3);
    // the sampled ratio stays inside the closed-form index band; the inf
    // itself is only approached logarithmically as t grows
    let (le, me) = nf.empirical_index_range(&default_grid()).unwrap();
    assert!(le >= 2.0 - 1e-6 && me <= 3.0 + 1e-6, "empirical ({le}, {me})");
}

#[test]
fn simonenko_table_uses_grid_estimate() {
    // tabulated power p = 2.4 on a log grid: empirical indices match p
    let grid = log_grid(1e-8, 1e8, 128);
    let phis: Vec<f64> = grid.iter().map(|&t| t.powf(0.4)).collect();
    let nf = NFunction::from_table(GeneratorTable::new(grid, phis).unwrap(), 4).unwrap();
    let (l, m) = nf.simonenko_indices(&default_grid()).unwrap();
    assert!((l - 2.4).abs() < 1e-6 && (m - 2.4).abs() < 1e-6, "({l}, {m})");
}

#[test]
fn conjugate_power_values() {
    // t^2/2 is self-conjugate
    assert!((power(2.0, 3).conjugate(1.0).unwrap() - 0.5).abs() < 1e-12);
    // conjugate of t^3/3 is t^(3/2)/(3/2)
    let v = power(3.0, 4).conjugate(1.0).unwrap();
    assert!((v - 2.0 / 3.0).abs() < 1e-12, "got {v}");
    assert_eq!(power(3.0, 4).conjugate(0.0).unwrap(), 0.0);
}

#[test]
fn conjugate_overflow_is_range_error() {
    // stationarity s*phi(s) = t has no representable solution
    let nf = power(1.5, 2);
    assert!(matches!(nf.conjugate(1e300), Err(Error::Range(_))));
}

#[test]
fn conjugate_closed_form_across_powers() {
    for &p in &[1.5, 2.0, 2.5, 3.0] {
        let nf = power(p, 5);
        let pp = p / (p - 1.0);
        for &t in &[0.2, 1.0, 3.7] {
            let v = nf.conjugate(t).unwrap();
            let exact = t.powf(pp) / pp;
            assert!((v - exact).abs() < 1e-10 * exact.max(1.0), "p={p}, t={t}");
        }
    }
}

#[test]
fn youngs_inequality_randomized() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let nfs = [power_sum(2.0, 3.0, 4), plasticity(2.0, 1.0, 4)];
    for nf in &nfs {
        for _ in 0..5_000 {
            let s: f64 = rng.gen_range(1e-3..50.0);
            let t: f64 = rng.gen_range(1e-3..50.0);
            let lhs = s * t;
            let rhs = nf.big_phi(s).unwrap() + nf.conjugate(t).unwrap();
            assert!(lhs <= rhs + 1e-9 * rhs.max(1.0), "s={s}, t={t}");
        }
    }
}

#[test]
fn double_conjugate_is_identity_on_powers() {
    // maximize t*s - conj(s) by golden section; the result must be Phi(t)
    let golden_max = |f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64| -> f64 {
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..90 {
            let c = b - phi * (b - a);
            let d = a + phi * (b - a);
            if f(c) < f(d) {
                a = c;
            } else {
                b = d;
            }
        }
        f(0.5 * (a + b))
    };
    for &p in &[1.5, 2.0, 3.0] {
        let nf = power(p, 5);
        for &t in &[0.3, 1.0, 2.2] {
            let obj = |s: f64| t * s - nf.conjugate(s).unwrap();
            // the maximizer is Phi'(t); bracket generously around it
            let hi = 2.0 * nf.big_phi_prime(t) + 10.0;
            let v = golden_max(&obj, 0.0, hi);
            let exact = nf.big_phi(t).unwrap();
            assert!(
                (v - exact).abs() <= 1e-6 * exact.max(1.0),
                "p={p}, t={t}: {v} vs {exact}"
            );
        }
    }
}

#[test]
fn sobolev_conjugate_power_ratio() {
    // Phi = t^p/p with N = 4: Phi_* is a pure power with exponent p* = 4,
    // so the logarithmic slope is identically 4
    let nf = power(2.0, 4);
    for &t in &[0.05, 0.5, 1.0, 8.0, 100.0] {
        let r = nf.sobolev_conjugate_ratio(t).unwrap();
        assert!((r - 4.0).abs() < 1e-4, "t={t}: ratio {r}");
    }
    assert_eq!(nf.sobolev_conjugate(0.0).unwrap(), 0.0);
}

#[test]
fn sobolev_conjugate_power_sum_ratio_band() {
    // ell* = 6, m* = 18 for (p, q) = (1.5, 1.8), N = 2
    let nf = power_sum(1.5, 1.8, 2);
    for &t in &log_grid(1e-3, 1e3, 64) {
        let r = nf.sobolev_conjugate_ratio(t).unwrap();
        assert!(
            (6.0 - 1e-3..=18.0 + 1e-3).contains(&r),
            "t={t}: ratio {r} outside [6, 18]"
        );
    }
}

#[test]
fn sobolev_conjugate_rejects_ell_one() {
    // plasticity with alpha = 1 has ell = 1: the non-reflexive scale
    let nf = plasticity(1.0, 0.5, 2);
    assert!(matches!(
        nf.sobolev_conjugate(1.0),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn delta2_powers() {
    let nf = power(2.0, 3);
    let c = nf.delta2_constant(0.0, 1e6).unwrap();
    assert!((c - 4.0).abs() < 1e-12, "got {c}");
    let c3 = power(3.0, 4).delta2_constant(0.0, 1e6).unwrap();
    assert!((c3 - 8.0).abs() < 1e-12);
}

#[test]
fn delta2_power_sum_saturates() {
    let nf = power_sum(2.0, 3.0, 4);
    let c = nf.delta2_constant(1.0, 1e8).unwrap();
    assert!((4.0..=8.0 + 1e-12).contains(&c));
    assert!(c > 7.99, "ratio should approach 2^q = 8, got {c}");
}

#[test]
fn smp_h_values() {
    // H(t) = t^2 phi(t) - Phi(t); for powers H = (1 - 1/p) t^p
    assert!((power(2.0, 3).smp_h(1.0).unwrap() - 0.5).abs() < 1e-14);
    let v = power(3.0, 4).smp_h(2.0).unwrap();
    assert!((v - 16.0 / 3.0).abs() < 1e-13, "got {v}");
    assert_eq!(power(2.0, 3).smp_h(0.0).unwrap(), 0.0);
}

#[test]
fn smp_h_monotone_and_nonnegative() {
    let nfs = [
        power(1.5, 2),
        power_sum(1.5, 1.8, 2),
        plasticity(2.0, 1.0, 4),
    ];
    for nf in &nfs {
        let mut prev = 0.0;
        for &t in &log_grid(1e-6, 1e6, 200) {
            let h = nf.smp_h(t).unwrap();
            assert!(h >= -1e-12, "H({t}) = {h} negative");
            assert!(h >= prev - 1e-9 * h.abs().max(1.0), "H not nondecreasing at {t}");
            prev = h;
        }
    }
}

#[test]
fn zeta_sandwich_power_is_equality() {
    let nf = power(2.0, 3);
    for &(rho, t) in &[(0.5, 2.0), (3.0, 0.1), (1.0, 1.0)] {
        assert!(nf.zeta_bounds_check(rho, t).unwrap());
        // both zetas collapse to t^2 when ell = m
        let phi_rt = nf.big_phi(rho * t).unwrap();
        let bound = nf.zeta0(t) * nf.big_phi(rho).unwrap();
        assert!((phi_rt - bound).abs() < 1e-12 * phi_rt.max(1e-300));
    }
}

#[test]
fn zeta_sandwich_power_sum_point_and_random() {
    let nf = power_sum(2.0, 3.0, 4);
    assert!(nf.zeta_bounds_check(2.0, 0.5).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..1_000 {
        let rho: f64 = rng.gen_range(1e-3..10.0);
        let t: f64 = rng.gen_range(1e-3..10.0);
        assert!(nf.zeta_bounds_check(rho, t).unwrap(), "failed at ({rho}, {t})");
    }
}

#[test]
fn zeta_star_sandwich_for_sobolev_conjugate() {
    // zeta_2(t) Phi_*(rho) <= Phi_*(rho t) <= zeta_3(t) Phi_*(rho)
    let nfs = [power(2.0, 4), power_sum(1.5, 1.8, 2)];
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for nf in &nfs {
        for _ in 0..60 {
            let rho: f64 = rng.gen_range(0.05..5.0);
            let t: f64 = rng.gen_range(0.05..5.0);
            let mid = nf.sobolev_conjugate(rho * t).unwrap();
            let base = nf.sobolev_conjugate(rho).unwrap();
            let lo = nf.zeta2(t) * base;
            let hi = nf.zeta3(t) * base;
            let slack = 1e-7;
            assert!(
                lo <= mid * (1.0 + slack) && mid <= hi * (1.0 + slack),
                "({rho}, {t}): {lo} <= {mid} <= {hi}"
            );
        }
    }
}

#[test]
fn integrated_growth_bounds_all_families() {
    // ell * Phi(t) <= t Phi'(t) <= m * Phi(t), the integrated index bounds
    let nfs = [
        power(2.0, 3),
        power_sum(2.0, 3.0, 4),
        plasticity(2.0, 1.0, 4),
        NFunction::from_family(NFunctionFamily::Elasticity { gamma: 1.5 }, 4).unwrap(),
        NFunction::from_family(NFunctionFamily::NewtonianFluid { alpha: 0.5, beta: 1.0 }, 3)
            .unwrap(),
    ];
    for nf in &nfs {
        for &t in &log_grid(1e-6, 1e6, 200) {
            let phi_t = nf.big_phi(t).unwrap();
            let t_phi_prime = t * nf.big_phi_prime(t);
            let tol = 1e-8 * t_phi_prime.abs().max(1e-300);
            assert!(
                nf.ell() * phi_t <= t_phi_prime + tol,
                "lower bound fails at t={t}"
            );
            assert!(
                t_phi_prime <= nf.em() * phi_t + tol,
                "upper bound fails at t={t}"
            );
        }
    }
}

#[test]
fn equivalence_scaled_power() {
    let base = power(2.0, 3);
    let scaled = base.scaled(3.0).unwrap();
    let rep = equivalence_check(&scaled, &base, &default_grid(), 1.0).unwrap();
    assert!(rep.equivalent);
    assert!((rep.c1 - 3.0).abs() < 1e-9 && (rep.c2 - 3.0).abs() < 1e-9);
}

#[test]
fn equivalence_power_sum_vs_power() {
    // t^2/2 + t^3/3 vs t^3/3 for t >= 1: bounded ratio
    let a = power_sum(2.0, 3.0, 4);
    let b = power(3.0, 4);
    let rep = equivalence_check(&a, &b, &default_grid(), 1.0).unwrap();
    assert!(rep.equivalent, "{rep:?}");
    assert!(rep.c1 >= 1.0 - 1e-9 && rep.c2 <= 2.5 + 1e-9, "{rep:?}");
}

#[test]
fn equivalence_detects_log_divergence() {
    // t^2 ln(1+t) vs t^2/2: the ratio grows without bound
    let a = plasticity(2.0, 1.0, 4);
    let b = power(2.0, 4);
    let rep = equivalence_check(&a, &b, &default_grid(), 1.0).unwrap();
    assert!(!rep.equivalent, "{rep:?}");
}

#[test]
fn power_equivalence_gives_lower_constant() {
    // Phi = t^1.8/1.8 against t^1.8: c1 = c2 = 1/1.8
    let nf = power(1.8, 2);
    let rep = power_equivalence(&nf, 1.8, &default_grid(), 1.0).unwrap();
    assert!(rep.equivalent);
    assert!((rep.c1 - 1.0 / 1.8).abs() < 1e-9);
    let (c, t0) = rep.power_lower_bound().unwrap();
    assert!((c - 1.0 / 1.8).abs() < 1e-9 && t0 == 1.0);
    // power_sum(1.5, 1.8) vs t^1.8 above 1: equivalent with finite band
    let ps = power_sum(1.5, 1.8, 2);
    let rep2 = power_equivalence(&ps, 1.8, &default_grid(), 1.0).unwrap();
    assert!(rep2.equivalent, "{rep2:?}");
    assert!(rep2.c1 > 0.0 && rep2.c2.is_finite());
}

#[test]
fn scaled_nfunction_consistency() {
    let nf = power_sum(2.0, 3.0, 4);
    let s = nf.scaled(2.5).unwrap();
    assert!((s.big_phi(1.7).unwrap() - 2.5 * nf.big_phi(1.7).unwrap()).abs() < 1e-12);
    assert_eq!(s.ell(), nf.ell());
    assert!((s.phi_at_one() - 2.5 * nf.phi_at_one()).abs() < 1e-14);
    assert!(nf.scaled(-1.0).is_err());
}

#[test]
fn table_round_trip_through_nfunction() {
    // sample the plasticity generator into a table; coarse agreement of Phi
    let exact = plasticity(2.0, 1.0, 4);
    let grid = log_grid(1e-8, 1e8, 512);
    let phis: Vec<f64> = grid.iter().map(|&t| exact.phi(t)).collect();
    let tab = NFunction::from_table(GeneratorTable::new(grid, phis).unwrap(), 4).unwrap();
    for &t in &[0.01, 0.5, 1.0, 20.0] {
        let a = tab.big_phi(t).unwrap();
        let b = exact.big_phi(t).unwrap();
        assert!((a - b).abs() < 1e-3 * b, "t={t}: table {a} vs exact {b}");
    }
    // measured indices close to (2, 3) from inside
    assert!(tab.ell() >= 2.0 - 1e-3 && tab.em() <= 3.0 + 1e-3);
}
