//! Invariant suites run by `smoothdiv validate`.
//!
//! Every check is deterministic: random sample points come from ChaCha8 with
//! a fixed seed, and details are rendered with fixed precision.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::convolution::Convolver;
use crate::error::{Error, Result};
use crate::estimators::{DsaParams, Estimator, SErrorBranch, ScaledParams};
use crate::oracle::{self, SieveTables};
use crate::quad::{self, QuadratureSpec};
use crate::render::real;
use crate::special::{SpecialFunctions, EULER_GAMMA, EXP_GAMMA, EXP_NEG_GAMMA};

const SEED: u64 = 0x5EED;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Special,
    Convolution,
    Estimators,
    Oracle,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Special, Suite::Convolution, Suite::Estimators, Suite::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Special => "special",
            Suite::Convolution => "convolution",
            Suite::Estimators => "estimators",
            Suite::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

struct Collector {
    suite: &'static str,
    checks: Vec<CheckResult>,
}

impl Collector {
    fn new(suite: Suite) -> Self {
        Self {
            suite: suite.name(),
            checks: Vec::new(),
        }
    }

    /// Records `check`; an error counts as a failure with its message as detail.
    fn run(&mut self, name: &'static str, check: impl FnOnce() -> Result<(bool, String)>) {
        let (passed, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        self.checks.push(CheckResult {
            suite: self.suite,
            name,
            passed,
            detail,
        });
    }
}

fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

/// Worst error and where it occurred, checked against `tol`.
fn worst(points: impl IntoIterator<Item = Result<(f64, f64)>>, tol: f64) -> Result<(bool, String)> {
    let mut max = f64::NEG_INFINITY;
    let mut at = f64::NAN;
    let mut n = 0;
    for p in points {
        let (u, err) = p?;
        n += 1;
        if err.is_nan() || err > max {
            max = err;
            at = u;
            if err.is_nan() {
                break;
            }
        }
    }
    Ok((max <= tol, format!("{n} points, max error {} at {} (tol {})", real(max), real(at), real(tol))))
}

fn sample(rng: &mut ChaCha8Rng, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64)
}

fn integrate_rel(f: impl Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64]) -> f64 {
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&p| p > a && p < b));
    pts.push(b);
    pts.windows(2)
        .map(|w| quad::integrate(&f, w[0], w[1], 1e-300, 1e-13, 400).value)
        .sum()
}

fn integer_breaks(a: f64, b: f64) -> Vec<f64> {
    (a.ceil() as i64..=b.floor() as i64).map(|k| k as f64).collect()
}

fn special_suite(sf: &SpecialFunctions) -> Vec<CheckResult> {
    let mut c = Collector::new(Suite::Special);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    c.run("rho_table_structure", || {
        sf.rho_table().check_structure()?;
        sf.omega_table().check_structure()?;
        Ok((true, "knots, segments and certificates consistent".into()))
    });
    c.run("rho_table_certificate", || {
        let t = sf.rho_table();
        let max = t.compute_certificate().into_iter().fold(0.0, f64::max);
        Ok((max <= t.target_rel_err(), format!("recomputed {} (target {})", real(max), real(t.target_rel_err()))))
    });
    c.run("omega_table_certificate", || {
        let t = sf.omega_table();
        let max = t.compute_certificate().into_iter().fold(0.0, f64::max);
        Ok((max <= t.target_rel_err(), format!("recomputed {} (target {})", real(max), real(t.target_rel_err()))))
    });
    c.run("rho_closed_form_on_1_2", || {
        let pts = grid(1.0, 2.0, 20).chain([1.5, 2.0]);
        worst(pts.map(|u| Ok((u, rel_err(sf.rho(u)?, 1.0 - u.ln())))), 1e-12)
    });
    c.run("omega_closed_form_on_1_2", || {
        worst(grid(1.0, 2.0, 20).map(|u| Ok((u, rel_err(sf.omega(u)?, 1.0 / u)))), 1e-10)
    });
    c.run("omega_closed_form_on_2_3", || {
        worst(
            grid(2.0, 3.0, 20).map(|u| Ok((u, rel_err(sf.omega(u)?, (1.0 + (u - 1.0).ln()) / u)))),
            1e-10,
        )
    });
    let rho_pts = sample(&mut rng, 1.0, 20.0, 200);
    c.run("rho_delay_integral_identity", || {
        worst(
            rho_pts.iter().map(|&u| {
                let rho = |s: f64| sf.rho(s).unwrap_or(f64::NAN);
                let integral = integrate_rel(rho, u - 1.0, u, &integer_breaks(u - 1.0, u));
                Ok((u, rel_err(u * sf.rho(u)?, integral)))
            }),
            1e-8,
        )
    });
    let omega_pts = sample(&mut rng, 2.0, 30.0, 200);
    c.run("omega_delay_integral_identity", || {
        worst(
            omega_pts.iter().map(|&u| {
                let omega = |s: f64| sf.omega(s).unwrap_or(f64::NAN);
                let integral = integrate_rel(omega, 1.0, u - 1.0, &integer_breaks(1.0, u - 1.0));
                Ok((u, (u * sf.omega(u)? - 1.0 - integral).abs()))
            }),
            1e-9,
        )
    });
    c.run("rho_differential_equation", || {
        let t = sf.rho_table();
        worst(
            rho_pts.iter().map(|&u| {
                let lhs = u * t.segment_derivative(u).ok_or_else(|| Error::domain("outside table"))?;
                Ok((u, rel_err(lhs, -sf.rho(u - 1.0)?)))
            }),
            1e-9,
        )
    });
    c.run("omega_differential_equation", || {
        let t = sf.omega_table();
        worst(
            omega_pts.iter().map(|&u| {
                let w = sf.omega(u)?;
                let w1 = t.segment_derivative(u).ok_or_else(|| Error::domain("outside table"))?;
                Ok((u, (w + u * w1 - sf.omega(u - 1.0)?).abs()))
            }),
            1e-9,
        )
    });
    c.run("rho_continuity_at_knots", || {
        let jump = sf.rho_table().max_knot_jump();
        Ok((jump <= 1e-10, format!("max relative jump {}", real(jump))))
    });
    c.run("omega_continuity_at_knots", || {
        let jump = sf.omega_table().max_knot_jump();
        Ok((jump <= 1e-10, format!("max relative jump {}", real(jump))))
    });
    c.run("rho_decreasing_in_unit_interval_range", || {
        let mut prev = sf.rho(1.0)?;
        let mut ok = (prev - 1.0).abs() == 0.0;
        for u in grid(1.0, 30.0, 600) {
            let r = sf.rho(u)?;
            ok &= r > 0.0 && r < prev;
            prev = r;
        }
        Ok((ok, "rho(1) = 1 and rho strictly decreasing on (1, 30)".into()))
    });
    c.run("rho_known_values", || {
        let cases = [(3.0, 4.860_838_829_113_1e-2), (10.0, 2.770_171_837_725_96e-11)];
        worst(cases.iter().map(|&(u, want)| Ok((u, rel_err(sf.rho(u)?, want)))), 1e-10)
    });
    c.run("omega_limit_at_cutoff", || {
        let cut = sf.omega_cutoff();
        let gap = (sf.omega(cut)? - EXP_NEG_GAMMA).abs();
        let beyond = sf.omega(cut + 1.0)?;
        Ok((gap < 1e-15 && beyond == EXP_NEG_GAMMA, format!("|omega(cutoff) - e^-gamma| = {}", real(gap))))
    });
    c.checks
}

fn convolution_suite(conv: &Convolver) -> Vec<CheckResult> {
    let mut c = Collector::new(Suite::Convolution);
    let sf = conv.special();
    c.run("tau_at_zero_is_exp_gamma", || {
        let t = conv.tau(0.0)?;
        let err = (t - EXP_GAMMA).abs();
        Ok((err <= 1e-8, format!("tau(0) = {}, error {}", real(t), real(err))))
    });
    c.run("tau_tail_identity", || {
        // tau(v) - tau(v + 1) = int_v^{v+1} rho = (v + 1) rho(v + 1)
        worst(
            [0.5, 1.0, 2.5, 4.0, 7.5].iter().map(|&v| {
                let diff = conv.tau(v)? - conv.tau(v + 1.0)?;
                Ok((v, rel_err(diff, (v + 1.0) * sf.rho(v + 1.0)?)))
            }),
            1e-8,
        )
    });
    c.run("empty_support_is_zero", || {
        let mut ok = true;
        for (u, v) in [(3.0, 2.0), (3.0, 2.5), (5.0, 6.0), (2.0, 1.0)] {
            ok &= conv.omega_rho(u, v)?.value == 0.0 && conv.omega_rho_prime(u, v)?.value == 0.0;
        }
        ok &= conv.rho_rho(4.0, 4.0)?.value == 0.0;
        Ok((ok, "C vanishes when v >= u - 1 (omega) or v >= u (rho)".into()))
    });
    c.run("convolution_signs_and_monotonicity", || {
        let mut ok = true;
        for u in [3.0, 4.5, 6.0, 9.0] {
            let mut prev = f64::INFINITY;
            for v in grid(0.0, u, 12) {
                let wr = conv.omega_rho(u, v)?.value;
                ok &= wr >= 0.0 && wr <= prev && conv.omega_rho_prime(u, v)?.value <= 0.0;
                ok &= conv.rho_rho(u, v)?.value >= 0.0;
                prev = wr;
            }
        }
        Ok((ok, "C(omega,rho) >= 0 and non-increasing in v; C(omega,rho') <= 0".into()))
    });
    c.run("quadrature_tolerance_halving", || {
        let tight = conv.with_spec(conv.spec().tightened())?;
        let mut max_excess = f64::NEG_INFINITY;
        let mut n = 0;
        for u in grid(2.5, 12.0, 10) {
            for v in grid(0.0, u - 1.0, 5) {
                n += 1;
                for (a, b) in [
                    (conv.omega_rho(u, v)?, tight.omega_rho(u, v)?),
                    (conv.omega_rho_prime(u, v)?, tight.omega_rho_prime(u, v)?),
                ] {
                    max_excess = max_excess.max((a.value - b.value).abs() - a.est_abs_err);
                }
            }
        }
        Ok((
            max_excess <= 0.0,
            format!("{n} points, max(|change| - est_abs_err) = {}", real(max_excess)),
        ))
    });
    c.checks
}

fn estimators_suite(est: &Estimator) -> Vec<CheckResult> {
    let mut c = Collector::new(Suite::Estimators);
    let sf = est.convolver().special();
    c.run("eta_headline", || {
        let e = est.eta(&DsaParams::new(863, 80, 160))?;
        Ok(((e - 0.09576).abs() <= 5e-4, format!("eta(863,80,160) = {}", real(e))))
    });
    c.run("empty_support_reduces_to_rho", || {
        let mut ok = true;
        for (x, y, z) in [(1e6, 100.0, 1e4), (1e9, 30.0, 1e8), (1e12, 1e4, 1e9)] {
            let p = ScaledParams::new(x, y, z)?;
            ok &= est.theta_estimate(&p)?.value / x == sf.rho(p.u())?;
        }
        Ok((ok, "value/x equals rho(u) when v >= u - 1".into()))
    });
    c.run("theta_matches_wp", || {
        worst(
            [(863, 80, 160), (862, 80, 160), (40, 10, 20), (60, 15, 30), (200, 20, 50)].iter().map(|&(k, l, m)| {
                let p = ScaledParams::new(2f64.powi(k), 2f64.powi(l), 2f64.powi(m))?;
                let theta = est.theta_estimate(&p)?.value / p.x();
                let wp = est.wp(&DsaParams::new(k as u32, l as u32, m as u32))?;
                Ok((k as f64, (theta - wp).abs()))
            }),
            1e-12,
        )
    });
    c.run("envelope_positive_and_linear_in_x", || {
        let mut max = 0.0_f64;
        let mut ok = true;
        for (u, v) in [(3.0, 1.5), (5.0, 2.0), (8.0, 0.5), (4.0, 0.0), (6.0, 3.0)] {
            for y in [10.0_f64, 50.0, 1e3] {
                let p = ScaledParams::new(y.powf(u), y, y.powf(v))?;
                let e = est.theta_error_bound(&p)?;
                ok &= e > 0.0 && est.theta_estimate(&p)?.error_envelope == e;
                // envelope / x as a function of (u, v, y) alone
                let (lu, ly) = (v + 1.0, y.ln());
                let guard = lu.ln().max(if v < 0.01 { 1.01_f64.ln() } else { 0.0 });
                let per_x = (sf.rho(u - 1.0)? + sf.rho(v)? * lu.ln() / ly + sf.rho(v)? / guard) / ly;
                max = max.max(rel_err(e / p.x(), per_x));
            }
        }
        Ok((ok && max < 1e-12, format!("envelopes positive; max deviation of envelope/x from its (u,v,y) form {}", real(max))))
    });
    c.run("s_error_branch_tie", || {
        let y = 100.0_f64;
        let z = y * y.ln();
        let b = est.s_error_branch(y, z)?;
        Ok((b == SErrorBranch::Large, format!("branch at z = y log y: {b:?}")))
    });
    c.run("psi_closed_form_main_terms", || {
        let h = est.psi_estimate_hildebrand(1e6, 1e3)?;
        let s = est.psi_estimate_saias(1e6, 1e3)?;
        let want_second = (EULER_GAMMA - 1.0) * -0.5 * 1e6 / 1e3f64.ln();
        let err = rel_err(h.main_term, (1.0 - 2f64.ln()) * 1e6).max(rel_err(s.second_term, want_second));
        Ok((err < 1e-10, format!("max relative error {}", real(err))))
    });
    c.checks
}

fn oracle_suite() -> Vec<CheckResult> {
    let mut c = Collector::new(Suite::Oracle);
    let t = match SieveTables::build(100_000) {
        Ok(t) => t,
        Err(e) => {
            c.run("sieve_build", || Err(e));
            return c.checks;
        }
    };
    c.run("sieve_least_factors", || {
        let mut ok = t.spf(12) == 2 && t.spf(91) == 7 && t.primes_up_to(30.0).len() == 10;
        for n in 2..t.limit() {
            let p = t.spf(n) as u64;
            ok &= n % p == 0 && (p == n || t.spf(p) as u64 == p);
        }
        Ok((ok, format!("limit {}, {} primes", t.limit(), t.primes().len())))
    });
    c.run("known_counts", || {
        let got = (
            oracle::psi_exact(100.0, 5.0, &t)?,
            oracle::phi_exact(100.0, 5.0, &t)?,
            oracle::theta_exact(20.0, 2.0, 3.0, &t)?,
            oracle::s_exact(5.0, 1.0, &t)?,
        );
        Ok((got == (34, 26, 5, 2.75), format!("{got:?}")))
    });
    c.run("partition_identity", || {
        let mut ok = true;
        for y in [3.0, 10.0, 50.0] {
            for x in [1.0_f64, 17.5, 1000.0, 9999.5, 10_000.0] {
                let n = x.floor() as u64;
                let prefix = oracle::rough_prefix_counts(n, y, &t);
                let mut total = 0u64;
                oracle::for_each_smooth(t.primes_up_to(y), n, |d| total += prefix[(n / d) as usize] as u64);
                ok &= total == n;
            }
        }
        Ok((ok, "sum over smooth d of Phi(x/d, y) = floor(x)".into()))
    });
    c.run("theta_decomposition_identity", || {
        let mut ok = true;
        let mut n = 0;
        for x in [1000.0, 31_622.0, 100_000.0] {
            for y in [5.0, 20.0, 100.0] {
                for z in [1.0, 10.0, 100.0] {
                    n += 1;
                    ok &= oracle::theta_exact(x, y, z, &t)? == oracle::theta_exact_decomposed(x, y, z, &t)?;
                }
            }
        }
        Ok((ok, format!("{n} triples")))
    });
    c.run("theta_monotonicity", || {
        let mut ok = true;
        let mut prev = u64::MAX;
        for z in [0.5, 1.0, 3.0, 10.0, 100.0, 1000.0, 1e4] {
            let v = oracle::theta_exact(50_000.0, 30.0, z, &t)?;
            ok &= v <= prev;
            prev = v;
        }
        let mut prev = 0;
        for x in [1e3, 5e3, 2e4, 1e5] {
            let v = oracle::theta_exact(x, 30.0, 100.0, &t)?;
            ok &= v >= prev;
            prev = v;
        }
        let mut prev = 0;
        for y in [2.0, 5.0, 30.0, 300.0] {
            let v = oracle::theta_exact(1e5, y, 100.0, &t)?;
            ok &= v >= prev;
            prev = v;
        }
        Ok((ok, "non-increasing in z, non-decreasing in x and y".into()))
    });
    c.run("mertens_product", || {
        let mut devs = Vec::new();
        for e in 2..=6 {
            let y = 10f64.powi(e);
            devs.push((oracle::zeta_one_y(y)? / (EXP_GAMMA * y.ln()) - 1.0).abs());
        }
        let ok = devs[4] < 0.02 && devs.windows(2).all(|w| w[1] < w[0]);
        Ok((ok, format!("deviations {}", devs.iter().map(|&d| real(d)).collect::<Vec<_>>().join(", "))))
    });
    c.run("s_exact_complements_partial_sum", || {
        worst(
            [(5.0, 10.0), (30.0, 1000.0), (100.0, 50_000.0), (1000.0, 1e5)].iter().map(|&(y, z)| {
                let total = oracle::s_exact(y, z, &t)? + oracle::smooth_reciprocal_sum(y, z, &t)?;
                Ok((y, rel_err(total, oracle::zeta_one_y(y)?)))
            }),
            1e-12,
        )
    });
    c.checks
}

/// Runs the given suites in order.
pub fn run(suites: &[Suite], est: &Estimator) -> ValidationReport {
    let mut checks = Vec::new();
    for s in suites {
        checks.extend(match s {
            Suite::Special => special_suite(est.convolver().special()),
            Suite::Convolution => convolution_suite(est.convolver()),
            Suite::Estimators => estimators_suite(est),
            Suite::Oracle => oracle_suite(),
        });
    }
    ValidationReport { checks }
}

/// Convenience for the default quadrature settings over custom tables.
pub fn run_with_tables(suites: &[Suite], sf: &SpecialFunctions, epsilon: f64) -> Result<ValidationReport> {
    let conv = Convolver::new(sf, QuadratureSpec::default())?;
    let est = Estimator::new(conv, epsilon)?;
    Ok(run(suites, &est))
}
