use proptest::prelude::*;
use smoothdiv::convolution::Convolver;
use smoothdiv::special::EXP_GAMMA;
use smoothdiv::SpecialFunctions;

fn sf() -> &'static SpecialFunctions {
    SpecialFunctions::standard()
}

fn conv() -> Convolver<'static> {
    Convolver::standard()
}

/// Composite Simpson over `[a, b]`, split at every integer and every `u - j`
/// so each panel sees a smooth integrand.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, u: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut cuts = vec![a, b];
    for k in a.ceil() as i64..=b.floor() as i64 {
        cuts.push(k as f64);
        cuts.push(u - k as f64);
    }
    cuts.retain(|&c| c >= a && c <= b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|p, q| (*p - *q).abs() < 1e-15);
    let n = 400;
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let h = (hi - lo) / n as f64;
        // evaluate just inside the panel so one-sided limits are used at the ends
        let g = |s: f64| f(s.clamp(lo + 1e-14, hi - 1e-14));
        let mut acc = g(lo) + g(hi);
        for i in 1..n {
            acc += g(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        total += acc * h / 3.0;
    }
    total
}

fn rho(s: f64) -> f64 {
    sf().rho(s).unwrap()
}

fn omega(s: f64) -> f64 {
    sf().omega(s).unwrap()
}

fn rho_prime(s: f64) -> f64 {
    sf().rho_prime(s).unwrap()
}

#[test]
fn tau_at_zero() {
    assert!((conv().tau(0.0).unwrap() - EXP_GAMMA).abs() < 1e-8);
    let oracle = simpson(rho, 0.0, 30.0, 0.0);
    assert!((oracle - EXP_GAMMA).abs() < 1e-10);
}

#[test]
fn tau_matches_simpson() {
    for v in [0.5, 1.0, 2.0, 3.5, 6.0] {
        let want = simpson(rho, v, 35.0, 0.0);
        let got = conv().tau_with_error(v).unwrap();
        // the Simpson oracle itself is good to a few 1e-13
        assert!((got.value - want).abs() < 5e-12, "v={v}: {} vs {want}", got.value);
        assert_eq!(got.effective_support.0, v);
    }
    // rho = 1 on [0, 1]
    assert!((conv().tau(0.5).unwrap() - (EXP_GAMMA - 0.5)).abs() < 1e-14);
}

#[test]
fn convolutions_match_simpson() {
    for (u, v) in [(3.0, 0.5), (4.0, 2.0), (4.7, 1.3), (6.0, 3.0), (8.2, 0.0), (10.0, 4.5)] {
        let c = conv();
        let wr = c.omega_rho(u, v).unwrap().value;
        let want = simpson(|s| omega(u - s) * rho(s), v.max(0.0), u - 1.0, u);
        assert!((wr - want).abs() < 1e-11 * want.abs().max(1.0), "omega*rho ({u},{v})");
        let wrp = c.omega_rho_prime(u, v).unwrap().value;
        let want = simpson(|s| omega(u - s) * rho_prime(s), v.max(1.0), u - 1.0, u);
        assert!((wrp - want).abs() < 1e-11 * want.abs().max(1.0), "omega*rho' ({u},{v})");
        let rr = c.rho_rho(u, v).unwrap().value;
        let want = simpson(|s| rho(u - s) * rho(s), v.max(0.0), u, u);
        assert!((rr - want).abs() < 1e-11 * want.abs().max(1.0), "rho*rho ({u},{v})");
    }
}

#[test]
fn omega_rho_prime_by_parts() {
    // int_v^{u-1} omega(u-s) rho'(s) ds
    //   = rho(u-1) - omega(u-v) rho(v) + int_v^{u-1} omega'(u-s) rho(s) ds
    for (u, v) in [(4.0, 1.5), (5.5, 2.0), (7.0, 1.0), (9.0, 3.25)] {
        let lhs = conv().omega_rho_prime(u, v).unwrap().value;
        let tail = simpson(|s| sf().omega_prime(u - s).unwrap() * rho(s), v, u - 1.0, u);
        let rhs = rho(u - 1.0) - omega(u - v) * rho(v) + tail;
        assert!((lhs - rhs).abs() < 1e-10, "({u},{v}): {lhs} vs {rhs}");
    }
}

#[test]
fn clipped_and_empty_supports() {
    let c = conv();
    assert_eq!(c.omega_rho(3.0, 2.0).unwrap().value, 0.0);
    assert_eq!(c.omega_rho(3.0, 5.0).unwrap().value, 0.0);
    assert_eq!(c.omega_rho_prime(2.0, 0.0).unwrap().value, 0.0);
    assert_eq!(c.rho_rho(2.0, 2.0).unwrap().value, 0.0);
    let r = c.omega_rho(5.0, -3.0).unwrap();
    assert_eq!(r.effective_support, (0.0, 4.0));
    assert_eq!(r.value, c.omega_rho(5.0, 0.0).unwrap().value);
    // below s = 1 rho' vanishes, so the lower limit is raised to 1
    assert_eq!(c.omega_rho_prime(5.0, 0.2).unwrap().effective_support.0, 1.0);
    assert!(c.omega_rho(f64::NAN, 1.0).is_err());
}

#[test]
fn halving_abs_tol_stays_within_reported_error() {
    let c = conv();
    let tight = c.with_spec(c.spec().tightened()).unwrap();
    for i in 0..10 {
        let u = 2.5 + i as f64;
        for j in 0..5 {
            let v = (u - 1.0) * j as f64 / 5.0;
            for (a, b) in [
                (c.omega_rho(u, v).unwrap(), tight.omega_rho(u, v).unwrap()),
                (c.omega_rho_prime(u, v).unwrap(), tight.omega_rho_prime(u, v).unwrap()),
                (c.rho_rho(u, v).unwrap(), tight.rho_rho(u, v).unwrap()),
            ] {
                assert!((a.value - b.value).abs() <= a.est_abs_err, "({u},{v})");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn omega_rho_non_increasing_in_v(u in 2.0f64..15.0, a in 0.0f64..14.0, b in 0.0f64..14.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let c = conv();
        let (cl, ch) = (c.omega_rho(u, lo).unwrap().value, c.omega_rho(u, hi).unwrap().value);
        prop_assert!(ch >= 0.0 && ch <= cl + 1e-15);
        prop_assert!(c.omega_rho_prime(u, lo).unwrap().value <= 0.0);
    }

    #[test]
    fn reported_error_is_non_negative(u in 1.5f64..20.0, v in -1.0f64..20.0) {
        let c = conv();
        for r in [c.omega_rho(u, v).unwrap(), c.omega_rho_prime(u, v).unwrap(), c.rho_rho(u, v).unwrap()] {
            prop_assert!(r.est_abs_err >= 0.0 && r.value.is_finite());
        }
    }
}
