use proptest::prelude::*;
use smoothdiv::estimators::{DsaParams, ScaledParams};
use smoothdiv::oracle::{
    eta_empirical, phi_exact, psi_exact, s_exact, smooth_part, smooth_reciprocal_sum,
    theta_exact, theta_exact_decomposed, weighted_smooth_sum, weighted_smooth_sum_sorted,
    zeta_one_y, SieveTables, WeightKind,
};
use smoothdiv::{Error, SpecialFunctions};
use std::sync::OnceLock;

fn tables() -> &'static SieveTables {
    static T: OnceLock<SieveTables> = OnceLock::new();
    T.get_or_init(|| SieveTables::build(1 << 20).unwrap())
}

/// Prime factorization by trial division, ascending with multiplicity.
fn factor(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        while n.is_multiple_of(p) {
            out.push(p);
            n /= p;
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn naive_smooth_part(n: u64, y: f64) -> u64 {
    factor(n).into_iter().filter(|&p| p as f64 <= y).product()
}

fn naive_counts(x: u64, y: f64, z: f64) -> (u64, u64, u64) {
    let (mut psi, mut phi, mut theta) = (0, 0, 0);
    for n in 1..=x {
        let f = factor(n);
        if f.iter().all(|&p| p as f64 <= y) {
            psi += 1;
        }
        if f.iter().all(|&p| p as f64 > y) {
            phi += 1;
        }
        if naive_smooth_part(n, y) as f64 > z {
            theta += 1;
        }
    }
    (psi, phi, theta)
}

#[test]
fn spec_examples() {
    let t = tables();
    assert_eq!(t.spf(12), 2);
    assert_eq!(t.spf(91), 7);
    assert_eq!(t.primes_up_to(30.0).len(), 10);
    assert_eq!(smooth_part(12, 2.0, t).unwrap(), 4);
    assert_eq!(smooth_part(100, 5.0, t).unwrap(), 100);
    assert_eq!(smooth_part(7, 2.0, t).unwrap(), 1);
    assert_eq!(smooth_part(1, 2.0, t).unwrap(), 1);
    assert_eq!(psi_exact(100.0, 5.0, t).unwrap(), 34);
    assert_eq!(phi_exact(100.0, 5.0, t).unwrap(), 26);
    assert_eq!(theta_exact(20.0, 2.0, 3.0, t).unwrap(), 5);
    assert_eq!(theta_exact_decomposed(20.0, 2.0, 3.0, t).unwrap(), 5);
    assert_eq!(theta_exact(1234.7, 3.0, 0.5, t).unwrap(), 1234);
    assert_eq!(zeta_one_y(1.9).unwrap(), 1.0);
    assert_eq!(zeta_one_y(2.0).unwrap(), 2.0);
    assert_eq!(zeta_one_y(5.0).unwrap(), 3.75);
    assert_eq!(zeta_one_y(7.0).unwrap(), 4.375);
    assert_eq!(s_exact(5.0, 1.0, t).unwrap(), 2.75);
    assert_eq!(s_exact(2.0, 1.0, t).unwrap(), 1.0);
    assert_eq!(s_exact(7.0, 0.5, t).unwrap(), zeta_one_y(7.0).unwrap());
}

#[test]
fn errors_past_the_limit() {
    let t = SieveTables::build(1000).unwrap();
    assert!(matches!(psi_exact(1001.0, 5.0, &t), Err(Error::Range { .. })));
    assert!(matches!(smooth_part(1001, 5.0, &t), Err(Error::Range { .. })));
    assert!(matches!(s_exact(5.0, 2000.0, &t), Err(Error::Range { .. })));
    assert!(matches!(SieveTables::build_with_ceiling(1 << 20, 1 << 10), Err(Error::Resource(_))));
    assert!(matches!(zeta_one_y(1e10), Err(Error::Resource(_))));
}

#[test]
fn counts_match_brute_force() {
    let t = tables();
    for x in [1u64, 2, 10, 97, 500, 3000] {
        for y in [2.0, 3.5, 7.0, 30.0, 1e4] {
            for z in [0.5, 1.0, 6.0, 100.0] {
                let (psi, phi, theta) = naive_counts(x, y, z);
                let xf = x as f64;
                assert_eq!(psi_exact(xf, y, t).unwrap(), psi, "psi({x},{y})");
                assert_eq!(phi_exact(xf, y, t).unwrap(), phi, "phi({x},{y})");
                assert_eq!(theta_exact(xf, y, z, t).unwrap(), theta, "theta({x},{y},{z})");
            }
        }
    }
    for n in 1..5000 {
        assert_eq!(smooth_part(n, 13.0, t).unwrap(), naive_smooth_part(n, 13.0));
        assert_eq!(t.largest_prime_factor(n).unwrap(), factor(n).last().copied().unwrap_or(1));
    }
}

#[test]
fn decomposition_identity_on_a_grid() {
    let t = tables();
    for k in 0..=50 {
        let x = (2000 * k + 7) as f64;
        for y in [5.0, 20.0, 100.0] {
            for z in [1.0, 10.0, 100.0] {
                assert_eq!(
                    theta_exact(x, y, z, t).unwrap(),
                    theta_exact_decomposed(x, y, z, t).unwrap(),
                    "({x},{y},{z})"
                );
            }
        }
    }
}

#[test]
fn s_exact_against_direct_series() {
    let t = tables();
    for z in [1.0, 3.0, 10.0, 1000.0, 65536.0] {
        // y = 2: sum over 2^a > z
        let direct: f64 = (0..200).map(|a| 2f64.powi(a)).filter(|&d| d > z).map(|d| 1.0 / d).sum();
        assert!((s_exact(2.0, z, t).unwrap() - direct).abs() < 1e-15, "y=2 z={z}");
        let mut terms = Vec::new();
        for a in 0..120 {
            for b in 0..80 {
                let d = 2f64.powi(a) * 3f64.powi(b);
                if d > z {
                    terms.push(1.0 / d);
                }
            }
        }
        terms.sort_by(|p, q| p.total_cmp(q));
        let direct: f64 = terms.iter().sum();
        assert!((s_exact(3.0, z, t).unwrap() - direct).abs() < 1e-14, "y=3 z={z}");
        let partial = smooth_reciprocal_sum(3.0, z, t).unwrap();
        assert!((partial + direct - 3.0).abs() < 1e-14);
    }
}

#[test]
fn weighted_sums_agree_across_orders() {
    let t = tables();
    let sf = SpecialFunctions::standard();
    let p = ScaledParams::new(1e6, 50.0, 500.0).unwrap();
    for w in [WeightKind::BuchstabOmega, WeightKind::DickmanRho] {
        let a = weighted_smooth_sum(&p, w, sf, t).unwrap();
        let b = weighted_smooth_sum_sorted(&p, w, sf, t).unwrap();
        assert!(a > 0.0 && (a - b).abs() < 1e-14 * a);
    }
    let omega = weighted_smooth_sum(&p, WeightKind::BuchstabOmega, sf, t).unwrap();
    let rho = weighted_smooth_sum(&p, WeightKind::DickmanRho, sf, t).unwrap();
    assert!(rho > 0.0 && omega > 0.0);
    let empty = ScaledParams::new(1e6, 50.0, 2e4).unwrap();
    assert_eq!(weighted_smooth_sum(&empty, WeightKind::BuchstabOmega, sf, t).unwrap(), 0.0);
}

#[test]
fn eta_empirical_matches_exact_fraction() {
    let t = tables();
    let (k, l, m) = (20u32, 5u32, 10u32);
    let (lo, hi) = (1u64 << (k - 1), 1u64 << k);
    let y = (1u64 << l) as f64;
    let z = (1u64 << m) as f64;
    let hits = (lo..hi).filter(|&n| naive_smooth_part(n, y) as f64 > z).count();
    let exact = hits as f64 / (hi - lo) as f64;
    let d = DsaParams::new(k, l, m);
    let s = eta_empirical(&d, 200_000, 11, t).unwrap();
    assert!((s.estimate - exact).abs() <= 4.0 * s.std_err, "{s:?} vs {exact}");
    assert_eq!(s, eta_empirical(&d, 200_000, 11, t).unwrap());
    assert_ne!(s, eta_empirical(&d, 200_000, 12, t).unwrap());

    let all = eta_empirical(&DsaParams::new(12, 12, 5), 10_000, 1, t).unwrap();
    assert_eq!(all.hits, all.samples);

    let control = eta_empirical(&DsaParams::new(40, 10, 40), 10_000, 1, t).unwrap();
    assert_eq!(control.hits, 0);
    assert!(matches!(eta_empirical(&DsaParams::new(128, 10, 20), 10, 1, t), Err(Error::Resource(_))));
    assert!(matches!(eta_empirical(&DsaParams::new(40, 30, 20), 10, 1, t), Err(Error::Resource(_))));
}

#[test]
fn mertens_product() {
    let y = 1e6f64;
    let ratio = zeta_one_y(y).unwrap() / (smoothdiv::special::EXP_GAMMA * y.ln());
    assert!((ratio - 1.0).abs() < 0.02);
    let devs: Vec<f64> = (2..=6)
        .map(|e| {
            let y = 10f64.powi(e);
            (zeta_one_y(y).unwrap() / (smoothdiv::special::EXP_GAMMA * y.ln()) - 1.0).abs()
        })
        .collect();
    assert!(devs.windows(2).all(|w| w[1] < w[0]), "{devs:?}");
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn counts_are_monotone(x in 1.0f64..50_000.0, dx in 0.0f64..10_000.0, y in 2.0f64..500.0, z in 0.0f64..1e4) {
        let t = tables();
        let x2 = x + dx;
        prop_assert!(psi_exact(x, y, t).unwrap() <= psi_exact(x2, y, t).unwrap());
        prop_assert!(theta_exact(x, y, z, t).unwrap() <= theta_exact(x2, y, z, t).unwrap());
        prop_assert!(theta_exact(x, y, z + 1.0, t).unwrap() <= theta_exact(x, y, z, t).unwrap());
        prop_assert!(psi_exact(x, y, t).unwrap() <= psi_exact(x, y + 10.0, t).unwrap());
    }

    #[test]
    fn decomposition_identity(x in 1.0f64..100_000.0, y in 2.0f64..1000.0, z in 0.0f64..5000.0) {
        let t = tables();
        prop_assert_eq!(theta_exact(x, y, z, t).unwrap(), theta_exact_decomposed(x, y, z, t).unwrap());
    }

    #[test]
    fn smooth_part_divides(n in 1u64..(1 << 20), y in 2.0f64..2000.0) {
        let s = smooth_part(n, y, tables()).unwrap();
        prop_assert_eq!(n % s, 0);
        let rest = n / s;
        prop_assert!(rest == 1 || tables().spf(rest) as f64 > y);
    }
}
