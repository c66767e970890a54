//! Asymptotic formulas for `Theta`, `Psi`, `Phi`, `S(y, z)`, the weighted
//! smooth-divisor sums, and the DSA exposure probability.
//!
//! Every `O(.)` term is evaluated with implied constant 1 and returned as an
//! `error_envelope`. Formulas are computed outside their proven domains too;
//! `in_theorem_domain` and `domain_notes` say when that happened.

use serde::Serialize;

use crate::convolution::Convolver;
use crate::error::{ensure_finite, Error, Result};
use crate::oracle::zeta_one_y;
use crate::special::{EULER_GAMMA, EXP_GAMMA};

/// Smallest `v` used in `log(v + 1)` denominators.
const LOG_GUARD_V: f64 = 0.01;

/// `(x, y, z)` with the logarithmic scalings `u = log x/log y`, `v = log z/log y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledParams {
    x: f64,
    y: f64,
    z: f64,
}

impl ScaledParams {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        ensure_finite("x", x)?;
        ensure_finite("y", y)?;
        ensure_finite("z", z)?;
        if x <= 0.0 {
            return Err(Error::domain(format!("x must be positive, got {x}")));
        }
        if y < 2.0 {
            return Err(Error::domain(format!("y must be at least 2, got {y}")));
        }
        if z < 0.0 {
            return Err(Error::domain(format!("z must be non-negative, got {z}")));
        }
        Ok(Self { x, y, z })
    }

    /// Builds `(x, x^(1/u), x^(v/u))`.
    pub fn from_scalings(x: f64, u: f64, v: f64) -> Result<Self> {
        ensure_finite("u", u)?;
        ensure_finite("v", v)?;
        if u <= 0.0 {
            return Err(Error::domain(format!("u must be positive, got {u}")));
        }
        let y = x.powf(1.0 / u);
        Self::new(x, y, y.powf(v))
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn log_y(&self) -> f64 {
        self.y.ln()
    }

    pub fn u(&self) -> f64 {
        self.x.ln() / self.y.ln()
    }

    /// `log z/log y`, or `-inf` when `z < 1`.
    pub fn v(&self) -> f64 {
        if self.z < 1.0 {
            f64::NEG_INFINITY
        } else {
            self.z.ln() / self.y.ln()
        }
    }

    /// `u_d = log d/log y` for a divisor `d`.
    pub fn u_of(&self, d: f64) -> f64 {
        d.ln() / self.y.ln()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateResult {
    pub main_term: f64,
    pub second_term: f64,
    pub value: f64,
    pub error_envelope: f64,
    pub in_theorem_domain: bool,
    pub domain_notes: Vec<String>,
}

impl EstimateResult {
    fn new(main_term: f64, second_term: f64, error_envelope: f64, domain: DomainCheck) -> Self {
        Self {
            main_term,
            second_term,
            value: main_term + second_term,
            error_envelope,
            in_theorem_domain: domain.ok,
            domain_notes: domain.notes,
        }
    }
}

#[derive(Debug, Default)]
struct DomainCheck {
    ok: bool,
    notes: Vec<String>,
}

impl DomainCheck {
    fn new() -> Self {
        Self {
            ok: true,
            notes: Vec::new(),
        }
    }

    fn require(&mut self, cond: bool, note: impl FnOnce() -> String) {
        if !cond {
            self.ok = false;
            self.notes.push(note());
        }
    }

    fn note(&mut self, note: String) {
        self.notes.push(note);
    }
}

/// DSA parameter triple: `n` has `k` bits, `y = 2^l`, `z = 2^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DsaParams {
    pub k: u32,
    pub l: u32,
    pub m: u32,
}

impl DsaParams {
    pub fn new(k: u32, l: u32, m: u32) -> Self {
        Self { k, l, m }
    }

    /// Human-readable remarks when the triple is outside `k > m >= l`.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.k <= self.m {
            w.push(format!("k = {} <= m = {}: no k-bit integer has a divisor above 2^m", self.k, self.m));
        }
        if self.m < self.l {
            w.push(format!("m = {} < l = {}: smooth-divisor threshold below the smoothness bound", self.m, self.l));
        }
        w
    }
}

/// Which branch of the piecewise `E(y, z)` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SErrorBranch {
    /// `z >= y log y`: `rho(v) log(v + 1)/log y`.
    Large,
    /// `z < y log y`: `1/z + log log y/log y`.
    Small,
}

#[derive(Debug, Clone, Copy)]
pub struct Estimator<'a> {
    conv: Convolver<'a>,
    epsilon: f64,
}

impl<'a> Estimator<'a> {
    pub fn new(conv: Convolver<'a>, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.6) {
            return Err(Error::domain(format!("epsilon must lie in (0, 0.6), got {epsilon}")));
        }
        Ok(Self { conv, epsilon })
    }

    pub fn standard() -> Estimator<'static> {
        Estimator {
            conv: Convolver::standard(),
            epsilon: 0.01,
        }
    }

    pub fn convolver(&self) -> &Convolver<'a> {
        &self.conv
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn rho(&self, u: f64) -> Result<f64> {
        self.conv.special().rho(u)
    }

    /// `exp((log log x)^(5/3 + eps))`.
    pub fn y_lower_bound(&self, x: f64) -> f64 {
        let ll = x.ln().ln();
        if ll <= 0.0 {
            1.0
        } else {
            ll.powf(5.0 / 3.0 + self.epsilon).exp()
        }
    }

    fn check_y_lower_bound(&self, dc: &mut DomainCheck, x: f64, y: f64) {
        let bound = self.y_lower_bound(x);
        dc.note(format!("epsilon = {}", self.epsilon));
        dc.require(y >= bound, || {
            format!("y = {y} is below exp((log log x)^(5/3+eps)) = {bound}")
        });
    }

    fn check_xy(x: f64, y: f64) -> Result<()> {
        ensure_finite("x", x)?;
        ensure_finite("y", y)?;
        if x < 3.0 {
            return Err(Error::domain(format!("x must be at least 3, got {x}")));
        }
        if y < 2.0 {
            return Err(Error::domain(format!("y must be at least 2, got {y}")));
        }
        Ok(())
    }

    /// Two-term asymptotic formula for `Theta(x, y, z)`.
    pub fn theta_estimate(&self, p: &ScaledParams) -> Result<EstimateResult> {
        Self::check_xy(p.x(), p.y())?;
        if p.z() < 1.0 {
            return Err(Error::domain(format!("z must be at least 1, got {}", p.z())));
        }
        let (u, v, log_y, x) = (p.u(), p.v(), p.log_y(), p.x());
        let c_rho = self.conv.omega_rho(u, v)?.value;
        let c_rho_prime = self.conv.omega_rho_prime(u, v)?.value;
        let main = (self.rho(u)? + c_rho) * x;
        let second = -EULER_GAMMA * c_rho_prime * x / log_y;
        let envelope = self.theta_error_bound(p)?;

        let mut dc = DomainCheck::new();
        let (y, z) = (p.y(), p.z());
        dc.require(z >= y * log_y, || format!("z = {z} is below y log y = {}", y * log_y));
        dc.require(z <= x / y, || format!("z = {z} exceeds x/y = {}", x / y));
        self.check_y_lower_bound(&mut dc, x, y);
        Ok(EstimateResult::new(main, second, envelope, dc))
    }

    /// Error envelope of the `Theta` formula divided by `x`.
    fn theta_envelope_per_x(&self, u: f64, v: f64, log_y: f64) -> Result<f64> {
        let rho_v = self.rho(v)?;
        let log_v1 = (v + 1.0).ln();
        let guarded = if v < LOG_GUARD_V {
            log_v1.max((1.0 + LOG_GUARD_V).ln())
        } else {
            log_v1
        };
        let second = if v > -1.0 { rho_v * log_v1 / log_y } else { 0.0 };
        Ok((self.rho(u - 1.0)? + second + rho_v / guarded) / log_y)
    }

    /// `(x/log y) {rho(u-1) + rho(v) log(v+1)/log y + rho(v)/log(v+1)}`.
    pub fn theta_error_bound(&self, p: &ScaledParams) -> Result<f64> {
        Self::check_xy(p.x(), p.y())?;
        if p.z() < 1.0 {
            return Err(Error::domain(format!("z must be at least 1, got {}", p.z())));
        }
        Ok(p.x() * self.theta_envelope_per_x(p.u(), p.v(), p.log_y())?)
    }

    fn psi_domain(&self, x: f64, y: f64) -> DomainCheck {
        let mut dc = DomainCheck::new();
        dc.require(x >= y, || format!("x = {x} is below y = {y}"));
        self.check_y_lower_bound(&mut dc, x, y);
        dc
    }

    /// `Psi(x, y) = rho(u) x {1 + O(log(u+1)/log y)}`.
    pub fn psi_estimate_hildebrand(&self, x: f64, y: f64) -> Result<EstimateResult> {
        Self::check_xy(x, y)?;
        let p = ScaledParams::new(x, y, 1.0)?;
        let main = self.rho(p.u())? * x;
        let envelope = main * (p.u() + 1.0).ln() / p.log_y();
        Ok(EstimateResult::new(main, 0.0, envelope, self.psi_domain(x, y)))
    }

    /// `Psi(x, y) = rho(u) x + (gamma - 1) rho'(u) x/log y + O(rho''(u) x/log^2 y)`.
    pub fn psi_estimate_saias(&self, x: f64, y: f64) -> Result<EstimateResult> {
        Self::check_xy(x, y)?;
        let p = ScaledParams::new(x, y, 1.0)?;
        let (u, log_y) = (p.u(), p.log_y());
        let sf = self.conv.special();
        let main = sf.rho(u)? * x;
        let second = (EULER_GAMMA - 1.0) * sf.rho_prime(u)? * x / log_y;
        let mut dc = self.psi_domain(x, y);
        dc.require(x >= y * log_y, || format!("x = {x} is below y log y = {}", y * log_y));
        // rho is constant below 1, so rho'' vanishes there; at u = 1 use the
        // right-continuous value with rho'(0) = 0.
        let rho2 = if u > 1.0 {
            sf.rho_double_prime(u)?
        } else if u == 1.0 {
            1.0
        } else {
            0.0
        };
        let envelope = rho2.abs() * x / (log_y * log_y);
        Ok(EstimateResult::new(main, second, envelope, dc))
    }

    fn check_s_inputs(y: f64, z: f64) -> Result<()> {
        ensure_finite("y", y)?;
        ensure_finite("z", z)?;
        if y < 3.0 {
            return Err(Error::domain(format!("y must be at least 3, got {y}")));
        }
        if z < 1.0 {
            return Err(Error::domain(format!("z must be at least 1, got {z}")));
        }
        Ok(())
    }

    /// Branch of `E(y, z)`; the tie `z = y log y` goes to [`SErrorBranch::Large`].
    pub fn s_error_branch(&self, y: f64, z: f64) -> Result<SErrorBranch> {
        Self::check_s_inputs(y, z)?;
        Ok(if z >= y * y.ln() {
            SErrorBranch::Large
        } else {
            SErrorBranch::Small
        })
    }

    /// Value of a specific `E(y, z)` branch regardless of where `z` lies.
    pub fn s_error_branch_value(&self, y: f64, z: f64, branch: SErrorBranch) -> Result<f64> {
        Self::check_s_inputs(y, z)?;
        let log_y = y.ln();
        Ok(match branch {
            SErrorBranch::Large => {
                let v = z.ln() / log_y;
                self.rho(v)? * (v + 1.0).ln() / log_y
            }
            SErrorBranch::Small => 1.0 / z + log_y.ln() / log_y,
        })
    }

    /// Piecewise `E(y, z)`.
    pub fn s_error_bound(&self, y: f64, z: f64) -> Result<f64> {
        let branch = self.s_error_branch(y, z)?;
        self.s_error_branch_value(y, z, branch)
    }

    /// `S(y, z) = tau(v) log y - gamma rho(v) + O(E(y, z))`.
    pub fn s_estimate(&self, y: f64, z: f64) -> Result<EstimateResult> {
        Self::check_s_inputs(y, z)?;
        let log_y = y.ln();
        let v = z.ln() / log_y;
        let main = self.conv.tau(v)? * log_y;
        let second = -EULER_GAMMA * self.rho(v)?;
        let envelope = self.s_error_bound(y, z)?;
        let mut dc = DomainCheck::new();
        dc.note(format!("epsilon = {}", self.epsilon));
        let z_max = log_y.powf(0.6 - self.epsilon).exp().exp();
        dc.require(z <= z_max, || {
            format!("z = {z} exceeds exp exp((log y)^(3/5-eps)) = {z_max}")
        });
        Ok(EstimateResult::new(main, second, envelope, dc))
    }

    /// `Phi(x, y) = (x omega(u) - y) e^gamma/zeta(1, y) + O(x rho(u)/log^2 y)`,
    /// with `zeta(1, y)` from the exact Euler product.
    pub fn phi_estimate(&self, x: f64, y: f64) -> Result<EstimateResult> {
        Self::check_xy(x, y)?;
        if y > x {
            return Err(Error::domain(format!("phi estimate needs y <= x, got y = {y} > x = {x}")));
        }
        let p = ScaledParams::new(x, y, 1.0)?;
        let (u, log_y) = (p.u(), p.log_y());
        let zeta = zeta_one_y(y)?;
        let main = (x * self.conv.special().omega(u)? - y) * EXP_GAMMA / zeta;
        let envelope = x * self.rho(u)? / (log_y * log_y);
        let mut dc = DomainCheck::new();
        self.check_y_lower_bound(&mut dc, x, y);
        Ok(EstimateResult::new(main, 0.0, envelope, dc))
    }

    fn check_divisor_range(p: &ScaledParams) -> Result<()> {
        Self::check_xy(p.x(), p.y())?;
        Self::check_s_inputs(p.y(), p.z().max(1.0))?;
        let top = p.x() / p.y();
        if p.z() < 1.0 || p.z() > top {
            return Err(Error::domain(format!(
                "divisor range needs 1 <= z <= x/y = {top}, got z = {}",
                p.z()
            )));
        }
        Ok(())
    }

    /// `sum_{z < d <= x/y, P+(d) <= y} omega(u - u_d)/d
    ///   = C_{omega,rho}(u,v) log y - gamma C_{omega,rho'}(u,v) + O(E(y,z))`.
    pub fn lemma6_estimate(&self, p: &ScaledParams) -> Result<EstimateResult> {
        Self::check_divisor_range(p)?;
        let (u, v, log_y) = (p.u(), p.v(), p.log_y());
        let main = self.conv.omega_rho(u, v)?.value * log_y;
        let second = -EULER_GAMMA * self.conv.omega_rho_prime(u, v)?.value;
        let envelope = self.s_error_bound(p.y(), p.z())?;
        let mut dc = DomainCheck::new();
        self.check_y_lower_bound(&mut dc, p.x(), p.y());
        Ok(EstimateResult::new(main, second, envelope, dc))
    }

    /// `C_{rho,rho}(u,v) log(u+1) + rho(u-v) rho(v) + rho(u-1)`, the right-hand
    /// side of the one-sided bound on the rho-weighted divisor sum.
    pub fn lemma4_bound(&self, p: &ScaledParams) -> Result<f64> {
        Self::check_divisor_range(p)?;
        let (u, v) = (p.u(), p.v());
        Ok(self.conv.rho_rho(u, v)?.value * (u + 1.0).ln()
            + self.rho(u - v)? * self.rho(v)?
            + self.rho(u - 1.0)?)
    }

    /// `rho(k/l) + C_{omega,rho}(k/l, m/l) - gamma C_{omega,rho'}(k/l, m/l)/(l log 2)`.
    pub fn wp(&self, d: &DsaParams) -> Result<f64> {
        if d.l == 0 {
            return Err(Error::domain("l must be positive"));
        }
        let l = d.l as f64;
        let (u, v) = (d.k as f64 / l, d.m as f64 / l);
        let c_rho = self.conv.omega_rho(u, v)?.value;
        let c_rho_prime = self.conv.omega_rho_prime(u, v)?.value;
        Ok(self.rho(u)? + c_rho - EULER_GAMMA * c_rho_prime / (l * std::f64::consts::LN_2))
    }

    /// `eta(k, l, m) ~ 2 wp(k, l, m) - wp(k - 1, l, m)`.
    pub fn eta(&self, d: &DsaParams) -> Result<f64> {
        if d.k <= 1 {
            return Err(Error::domain(format!("k must be at least 2, got {}", d.k)));
        }
        let prev = DsaParams { k: d.k - 1, ..*d };
        Ok(2.0 * self.wp(d)? - self.wp(&prev)?)
    }

    /// Envelope carried over to `eta`: `2 E(2^k)/2^k + E(2^(k-1))/2^(k-1)` with
    /// `E` the `Theta` error envelope at `y = 2^l`, `z = 2^m`.
    pub fn eta_envelope(&self, d: &DsaParams) -> Result<f64> {
        if d.k <= 1 || d.l == 0 {
            return Err(Error::domain("eta envelope needs k >= 2 and l >= 1"));
        }
        let l = d.l as f64;
        let log_y = l * std::f64::consts::LN_2;
        let v = d.m as f64 / l;
        let now = self.theta_envelope_per_x(d.k as f64 / l, v, log_y)?;
        let before = self.theta_envelope_per_x((d.k - 1) as f64 / l, v, log_y)?;
        Ok(2.0 * now + before)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::SpecialFunctions;

    fn est() -> Estimator<'static> {
        Estimator::standard()
    }

    fn rho(u: f64) -> f64 {
        SpecialFunctions::standard().rho(u).unwrap()
    }

    #[test]
    fn scaled_params_recompute_scalings() {
        let p = ScaledParams::new(1e6, 100.0, 1e4).unwrap();
        assert!((p.u() - 3.0).abs() < 1e-15);
        assert!((p.v() - 2.0).abs() < 1e-15);
        let q = ScaledParams::new(1e6, 100.0, 0.5).unwrap();
        assert_eq!(q.v(), f64::NEG_INFINITY);
        assert!(ScaledParams::new(1e6, 1.5, 1.0).is_err());
        assert!(ScaledParams::new(f64::NAN, 3.0, 1.0).is_err());
    }

    #[test]
    fn theta_all_smooth_case() {
        let p = ScaledParams::new(1e6, 1e6, 1.0).unwrap();
        let r = est().theta_estimate(&p).unwrap();
        assert!((r.value - 1e6).abs() < 1e-6);
        assert_eq!(r.second_term, 0.0);
        assert!(!r.in_theorem_domain);
        assert_eq!(r.value, r.main_term + r.second_term);
    }

    #[test]
    fn theta_rejects_bad_inputs() {
        let p = ScaledParams::new(2.0, 2.0, 1.0).unwrap();
        assert!(matches!(est().theta_estimate(&p), Err(Error::Domain(_))));
        let p = ScaledParams::new(100.0, 2.0, 0.5).unwrap();
        assert!(matches!(est().theta_estimate(&p), Err(Error::Domain(_))));
    }

    #[test]
    fn theta_dsa_point_in_domain() {
        let x = 2f64.powi(863);
        let p = ScaledParams::new(x, 2f64.powi(80), 2f64.powi(160)).unwrap();
        let r = est().theta_estimate(&p).unwrap();
        assert!(r.in_theorem_domain, "{:?}", r.domain_notes);
        assert!(r.domain_notes.iter().any(|n| n.contains("epsilon")));
        let wp = est().wp(&DsaParams::new(863, 80, 160)).unwrap();
        assert!((r.value / x - wp).abs() < 1e-12);
    }

    #[test]
    fn theta_envelope_guard_and_scaling() {
        let e = est();
        let p1 = ScaledParams::new(1e6, 100.0, 1e4).unwrap();
        let b1 = e.theta_error_bound(&p1).unwrap();
        assert!(b1 > 0.0 && b1.is_finite());
        let p2 = ScaledParams::new(1e6, 100.0, 1.0).unwrap();
        let b2 = e.theta_error_bound(&p2).unwrap();
        let per_x = (rho(2.0) + 0.0 + 1.0 / 1.01f64.ln()) / 100f64.ln();
        assert!((b2 / 1e6 - per_x).abs() < 1e-12);
        // envelope is x times a function of (u, v, y)
        let e1 = e.theta_envelope_per_x(3.5, 1.7, 5.0).unwrap();
        let e2 = e.theta_envelope_per_x(3.5, 1.7, 5.0).unwrap();
        assert_eq!(e1, e2);
    }

    #[test]
    fn hildebrand_examples() {
        let r = est().psi_estimate_hildebrand(1e6, 1e3).unwrap();
        assert!((r.main_term - (1.0 - 2f64.ln()) * 1e6).abs() < 1e-6);
        let r = est().psi_estimate_hildebrand(1000.0, 1000.0).unwrap();
        assert!((r.main_term - 1000.0).abs() < 1e-9);
        assert!(est().psi_estimate_hildebrand(2.0, 10.0).is_err());
        assert!(est().psi_estimate_hildebrand(100.0, 1.0).is_err());
    }

    #[test]
    fn saias_second_term() {
        let r = est().psi_estimate_saias(1e6, 1e3).unwrap();
        let expect = (EULER_GAMMA - 1.0) * (-0.5) * 1e6 / 1e3f64.ln();
        assert!((r.second_term - expect).abs() < 1e-9 * expect.abs());
        let y = 1e4_f64;
        let x = y.powf(1.0001);
        let r = est().psi_estimate_saias(x, y).unwrap();
        assert!((r.main_term - x).abs() < 1e-3 * x);
        assert!(r.second_term > 0.0 && r.second_term < 0.1 * x);
    }

    #[test]
    fn s_error_branches() {
        let e = est();
        let big = e.s_error_bound(100.0, 1e6).unwrap();
        assert!((big - rho(3.0) * 4f64.ln() / 100f64.ln()).abs() < 1e-15);
        let small = e.s_error_bound(100.0, 10.0).unwrap();
        assert!((small - (0.1 + 100f64.ln().ln() / 100f64.ln())).abs() < 1e-15);
        let tie = 100.0 * 100f64.ln();
        assert_eq!(e.s_error_branch(100.0, tie).unwrap(), SErrorBranch::Large);
        assert!(e.s_error_bound(2.5, 10.0).is_err());
        assert!(e.s_error_bound(10.0, 0.5).is_err());
    }

    #[test]
    fn s_estimate_terms() {
        let e = est();
        let r = e.s_estimate(1e4, 1e8).unwrap();
        let tau2 = e.convolver().tau(2.0).unwrap();
        assert!((r.main_term - tau2 * 1e4f64.ln()).abs() < 1e-12);
        assert!((r.second_term + EULER_GAMMA * rho(2.0)).abs() < 1e-15);
    }

    #[test]
    fn phi_main_term() {
        let r = est().phi_estimate(1e6, 1e3).unwrap();
        let zeta = zeta_one_y(1e3).unwrap();
        let expect = (1e6 * 0.5 - 1e3) * EXP_GAMMA / zeta;
        assert!((r.main_term - expect).abs() < 1e-9 * expect);
        assert!(matches!(est().phi_estimate(10.0, 20.0), Err(Error::Domain(_))));
    }

    #[test]
    fn lemma6_edges() {
        let e = est();
        let p = ScaledParams::new(1e6, 50.0, 1e6 / 50.0).unwrap();
        let r = e.lemma6_estimate(&p).unwrap();
        assert!(r.value.abs() < 1e-12);
        let p = ScaledParams::new(1e6, 50.0, 1e6).unwrap();
        assert!(e.lemma6_estimate(&p).is_err());
        let mut last = f64::INFINITY;
        for z in [1.0, 10.0, 100.0, 1000.0, 10000.0] {
            let p = ScaledParams::new(1e6, 50.0, z).unwrap();
            let m = e.lemma6_estimate(&p).unwrap().main_term;
            assert!(m <= last + 1e-12);
            last = m;
        }
    }

    #[test]
    fn lemma4_bound_nonnegative() {
        let e = est();
        for (x, y, z) in [(1e6, 50.0, 500.0), (1e6, 50.0, 1e6 / 50.0), (1e5, 10.0, 1.0)] {
            let p = ScaledParams::new(x, y, z).unwrap();
            assert!(e.lemma4_bound(&p).unwrap() > 0.0);
        }
    }

    #[test]
    fn wp_and_eta_reductions() {
        let e = est();
        // m/l >= k/l - 1: convolutions vanish
        let d = DsaParams::new(30, 10, 25);
        assert!((e.wp(&d).unwrap() - rho(3.0)).abs() < 1e-15);
        let eta = e.eta(&d).unwrap();
        assert!((eta - (2.0 * rho(3.0) - rho(2.9))).abs() < 1e-14);
        assert!(e.wp(&DsaParams::new(10, 0, 5)).is_err());
        assert!(e.eta(&DsaParams::new(1, 1, 1)).is_err());
        let mut last = f64::INFINITY;
        for m in [10, 15, 20, 30, 40, 60] {
            let w = e.wp(&DsaParams::new(100, 10, m)).unwrap();
            assert!(w < last);
            last = w;
        }
        for k in [862, 863] {
            let w = e.wp(&DsaParams::new(k, 80, 160)).unwrap();
            assert!(w > 0.0 && w < 1.0);
        }
    }

    #[test]
    fn dsa_warnings() {
        assert!(DsaParams::new(863, 80, 160).warnings().is_empty());
        assert_eq!(DsaParams::new(40, 10, 40).warnings().len(), 1);
        assert_eq!(DsaParams::new(40, 10, 5).warnings().len(), 1);
    }
}
