//! Dickman and Buchstab functions.
//!
//! Both functions are stored as one truncated Taylor series per unit interval
//! `[k, k+1]`, expanded about the midpoint `k + 1/2`. The series for interval
//! `k` is generated from the one for interval `k - 1` by matching coefficients
//! in the delay equations
//!
//! ```text
//! u rho'(u) + rho(u - 1) = 0                (u > 1),  rho = 1 on [0, 1]
//! (u omega(u))' = omega(u - 1)              (u > 2),  u omega(u) = 1 on [1, 2]
//! ```
//!
//! and the constant term is fixed by continuity at the left knot. The analytic
//! continuation of each piece is singular only at integers `<= k - 1`, so the
//! series converges at the interval ends with ratio 1/3 and a few dozen terms
//! give full double precision.
//!
//! Every table carries a per-segment certificate: the largest relative defect
//! observed in the delay equation, the continuity mismatch at the left knot,
//! and the size of the last retained term. Construction fails if any entry
//! exceeds the requested accuracy.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `e^gamma`, also the value of the integral of `rho` over `[0, inf)`.
pub const EXP_GAMMA: f64 = 1.781_072_417_990_198;

/// `e^-gamma`, the limit of the Buchstab function.
pub const EXP_NEG_GAMMA: f64 = 0.561_459_483_566_885_2;

/// Values of `rho` below this are reported as zero.
pub const RHO_UNDERFLOW: f64 = 1e-180;

const TERMS: usize = 48;
const SAMPLE_POINTS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub euler_gamma: f64,
    pub exp_gamma: f64,
    pub exp_neg_gamma: f64,
}

impl Constants {
    pub const STANDARD: Constants = Constants {
        euler_gamma: EULER_GAMMA,
        exp_gamma: EXP_GAMMA,
        exp_neg_gamma: EXP_NEG_GAMMA,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionKind {
    Dickman,
    Buchstab,
}

/// Piecewise polynomial table on the unit intervals `[knots[j], knots[j+1]]`.
///
/// `segments[j]` holds Taylor coefficients in `t = u - (knots[j] + 1/2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseFunction {
    kind: FunctionKind,
    knots: Vec<f64>,
    segments: Vec<Vec<f64>>,
    certificate: Vec<f64>,
    u_max: f64,
    target_rel_err: f64,
}

#[inline]
fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0_f64, |acc, &c| acc.mul_add(t, c))
}

#[inline]
fn horner_derivative(coeffs: &[f64], t: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (i, &c)| acc.mul_add(t, i as f64 * c))
}

/// Antiderivative vanishing at `t = 0`.
#[inline]
fn horner_antiderivative(coeffs: &[f64], t: f64) -> f64 {
    let inner = coeffs
        .iter()
        .enumerate()
        .rev()
        .fold(0.0_f64, |acc, (i, &c)| acc.mul_add(t, c / (i + 1) as f64));
    inner * t
}

fn sample_ts() -> impl Iterator<Item = f64> {
    (0..SAMPLE_POINTS).map(|i| -0.5 + i as f64 / (SAMPLE_POINTS - 1) as f64)
}

fn rel_gap(a: f64, b: f64) -> f64 {
    let scale = b.abs().max(f64::MIN_POSITIVE);
    (a - b).abs() / scale
}

impl PiecewiseFunction {
    /// Builds the Dickman table on `[0, ceil(u_max)]`.
    pub fn dickman(u_max: f64, target_rel_err: f64) -> Result<Self> {
        Self::build(FunctionKind::Dickman, u_max, target_rel_err)
    }

    /// Builds the Buchstab table on `[0, ceil(u_max)]`; `u_max >= 2`.
    pub fn buchstab(u_max: f64, target_rel_err: f64) -> Result<Self> {
        Self::build(FunctionKind::Buchstab, u_max, target_rel_err)
    }

    fn build(kind: FunctionKind, u_max: f64, target_rel_err: f64) -> Result<Self> {
        ensure_finite("u_max", u_max)?;
        let min_u = match kind {
            FunctionKind::Dickman => 1.0,
            FunctionKind::Buchstab => 2.0,
        };
        if u_max < min_u || u_max > 1000.0 {
            return Err(Error::domain(format!(
                "table ceiling u_max = {u_max} must lie in [{min_u}, 1000]"
            )));
        }
        if !(target_rel_err > 0.0 && target_rel_err < 1.0) {
            return Err(Error::domain(format!(
                "target_rel_err = {target_rel_err} must lie in (0, 1)"
            )));
        }
        let n_seg = u_max.ceil() as usize;
        let knots: Vec<f64> = (0..=n_seg).map(|k| k as f64).collect();
        let mut segments: Vec<Vec<f64>> = Vec::with_capacity(n_seg);

        for k in 0..n_seg {
            let seg = match (kind, k) {
                (FunctionKind::Dickman, 0) => {
                    let mut c = vec![0.0; TERMS];
                    c[0] = 1.0;
                    c
                }
                (FunctionKind::Dickman, _) => dickman_step(&segments[k - 1], k),
                (FunctionKind::Buchstab, 0) => vec![0.0; TERMS],
                (FunctionKind::Buchstab, 1) => {
                    // 1/(3/2 + t)
                    let mut c = Vec::with_capacity(TERMS);
                    let mut term = 1.0 / 1.5;
                    for _ in 0..TERMS {
                        c.push(term);
                        term *= -1.0 / 1.5;
                    }
                    c
                }
                (FunctionKind::Buchstab, _) => buchstab_step(&segments[k - 1], k),
            };
            segments.push(seg);
        }

        let mut table = PiecewiseFunction {
            kind,
            knots,
            segments,
            certificate: Vec::new(),
            u_max,
            target_rel_err,
        };
        table.certificate = table.compute_certificate();
        let (worst_seg, worst) = table.worst_certificate();
        if worst > target_rel_err {
            return Err(Error::Construction(format!(
                "{kind:?} table certificate {worst:e} on segment {worst_seg} exceeds target {target_rel_err:e}"
            )));
        }
        Ok(table)
    }

    /// Recomputes the per-segment defect certificate from the stored coefficients.
    pub fn compute_certificate(&self) -> Vec<f64> {
        (0..self.segments.len())
            .map(|k| self.segment_defect(k))
            .collect()
    }

    fn segment_defect(&self, k: usize) -> f64 {
        let c = &self.segments[k];
        let center = self.knots[k] + 0.5;
        let tail = |value_scale: f64| {
            let last = c.last().copied().unwrap_or(0.0).abs();
            last * 0.5f64.powi(c.len() as i32 - 1) / value_scale.abs().max(f64::MIN_POSITIVE)
        };
        match (self.kind, k) {
            (FunctionKind::Dickman, 0) => sample_ts().map(|t| rel_gap(horner(c, t), 1.0)).fold(0.0, f64::max),
            (FunctionKind::Buchstab, 0) => sample_ts().map(|t| horner(c, t).abs()).fold(0.0, f64::max),
            (FunctionKind::Buchstab, 1) => {
                let fit = sample_ts()
                    .map(|t| rel_gap(horner(c, t), 1.0 / (center + t)))
                    .fold(0.0, f64::max);
                fit.max(tail(horner(c, 0.5)))
            }
            (kind, _) => {
                let prev = &self.segments[k - 1];
                let ode = sample_ts()
                    .map(|t| {
                        let lagged = horner(prev, t);
                        let u = center + t;
                        let residual = match kind {
                            FunctionKind::Dickman => u * horner_derivative(c, t) + lagged,
                            FunctionKind::Buchstab => {
                                horner(c, t) + u * horner_derivative(c, t) - lagged
                            }
                        };
                        residual.abs() / lagged.abs().max(f64::MIN_POSITIVE)
                    })
                    .fold(0.0, f64::max);
                let join = rel_gap(horner(c, -0.5), horner(prev, 0.5));
                let right = horner(c, 0.5);
                ode.max(join).max(tail(right))
            }
        }
    }

    fn worst_certificate(&self) -> (usize, f64) {
        self.certificate
            .iter()
            .copied()
            .enumerate()
            .fold((0, 0.0), |acc, (i, v)| if v > acc.1 || v.is_nan() { (i, v) } else { acc })
    }

    pub fn kind(&self) -> FunctionKind {
        self.kind
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn segments(&self) -> &[Vec<f64>] {
        &self.segments
    }

    pub fn certificate(&self) -> &[f64] {
        &self.certificate
    }

    /// Largest entry of the stored certificate.
    pub fn max_certificate(&self) -> f64 {
        self.worst_certificate().1
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    pub fn target_rel_err(&self) -> f64 {
        self.target_rel_err
    }

    /// Right end of the tabulated range.
    pub fn table_end(&self) -> f64 {
        *self.knots.last().expect("table has knots")
    }

    fn locate(&self, u: f64) -> Option<(usize, f64)> {
        let start = self.knots[0];
        let end = self.table_end();
        if u < start || u > end || u.is_nan() {
            return None;
        }
        let mut j = (u - start).floor() as usize;
        if j >= self.segments.len() {
            j = self.segments.len() - 1;
        }
        Some((j, u - (self.knots[j] + 0.5)))
    }

    /// Evaluates the table. Below the first knot the function is zero; above
    /// the last knot `None` is returned. Knots evaluate right-continuously.
    pub fn eval(&self, u: f64) -> Option<f64> {
        if u < self.knots[0] {
            return Some(0.0);
        }
        self.locate(u).map(|(j, t)| horner(&self.segments[j], t))
    }

    /// Derivative of the stored polynomial segment containing `u`.
    pub fn segment_derivative(&self, u: f64) -> Option<f64> {
        if u < self.knots[0] {
            return Some(0.0);
        }
        self.locate(u)
            .map(|(j, t)| horner_derivative(&self.segments[j], t))
    }

    /// Integral of the tabulated function over `[a, b]` from the segment
    /// antiderivatives. Requires `b` inside the table.
    pub fn integral(&self, a: f64, b: f64) -> Result<f64> {
        ensure_finite("a", a)?;
        ensure_finite("b", b)?;
        if b < a {
            return self.integral(b, a).map(|v| -v);
        }
        let end = self.table_end();
        if b > end {
            return Err(Error::Range {
                what: "integration bound",
                value: b,
                ceiling: end,
            });
        }
        let a = a.max(self.knots[0]);
        if b <= a {
            return Ok(0.0);
        }
        let mut acc = crate::sum::NeumaierSum::new();
        let first = (a - self.knots[0]).floor() as usize;
        for j in first..self.segments.len() {
            let lo = self.knots[j].max(a);
            let hi = self.knots[j + 1].min(b);
            if hi <= lo {
                break;
            }
            let center = self.knots[j] + 0.5;
            let c = &self.segments[j];
            acc += horner_antiderivative(c, hi - center) - horner_antiderivative(c, lo - center);
        }
        Ok(acc.value())
    }

    /// Largest relative jump across interior knots where the function is continuous.
    pub fn max_knot_jump(&self) -> f64 {
        let first_continuous = match self.kind {
            FunctionKind::Dickman => 1,
            FunctionKind::Buchstab => 2,
        };
        (first_continuous..self.segments.len())
            .map(|k| rel_gap(horner(&self.segments[k], -0.5), horner(&self.segments[k - 1], 0.5)))
            .fold(0.0, f64::max)
    }

    /// Checks the structural invariants of a table read from disk.
    pub fn check_structure(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Format(format!("piecewise table: {msg}")));
        if self.knots.len() < 2 {
            return bad("fewer than two knots");
        }
        if self.knots.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
            return bad("knots not strictly increasing");
        }
        if self.knots.iter().enumerate().any(|(i, &k)| k != i as f64) {
            return bad("knots must be the integers 0, 1, 2, ...");
        }
        if self.segments.len() != self.knots.len() - 1 {
            return bad("segment count does not match knot pairs");
        }
        if self.certificate.len() != self.segments.len() {
            return bad("certificate length does not match segment count");
        }
        if self.segments.iter().any(|s| s.is_empty() || s.iter().any(|c| !c.is_finite())) {
            return bad("empty or non-finite segment coefficients");
        }
        if !(self.u_max <= self.table_end() && self.u_max > 0.0) {
            return bad("u_max outside the tabulated range");
        }
        Ok(())
    }

    /// Mutable access to coefficients, used to build corrupted fixtures.
    #[doc(hidden)]
    pub fn segments_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.segments
    }
}

fn dickman_step(prev: &[f64], k: usize) -> Vec<f64> {
    let a = k as f64 + 0.5;
    let mut c = vec![0.0; TERMS];
    // (a + t) p'(t) = -prev(t)  =>  a (i+1) c[i+1] + i c[i] = -prev[i]
    for i in 0..TERMS - 1 {
        c[i + 1] = -(prev[i] + i as f64 * c[i]) / (a * (i + 1) as f64);
    }
    // Fix c[0] from u rho(u) = int_{u-1}^{u} rho at u = k + 1/2:
    //   a c[0] = int_0^{1/2} prev + int_{-1/2}^0 p.
    // Both integrals are positive, so nothing cancels. Matching continuity at
    // the knot instead would subtract nearly equal numbers and feed rounding
    // into the slowly decaying ~1/u solution of the delay equation.
    let right_half_prev = horner_antiderivative(prev, 0.5);
    let left_half_nonconst = -horner_antiderivative(&c, -0.5);
    c[0] = (right_half_prev + left_half_nonconst) / (a - 0.5);
    c
}

fn buchstab_step(prev: &[f64], k: usize) -> Vec<f64> {
    let a = k as f64 + 0.5;
    // p(t) + (a + t) p'(t) = prev(t)  =>  c[i] + a (i+1) c[i+1] + i c[i] = prev[i]
    let particular = {
        let mut c = vec![0.0; TERMS];
        for i in 0..TERMS - 1 {
            c[i + 1] = (prev[i] - (i + 1) as f64 * c[i]) / (a * (i + 1) as f64);
        }
        c
    };
    let homogeneous = {
        let mut c = vec![0.0; TERMS];
        c[0] = 1.0;
        for i in 0..TERMS - 1 {
            c[i + 1] = -c[i] / a;
        }
        c
    };
    let left = horner(prev, 0.5);
    let scale = (left - horner(&particular, -0.5)) / horner(&homogeneous, -0.5);
    particular
        .iter()
        .zip(&homogeneous)
        .map(|(p, h)| p + scale * h)
        .collect()
}

/// Table construction settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TableConfig {
    pub rho_u_max: f64,
    pub omega_cutoff: f64,
    pub target_rel_err: f64,
}

impl Default for TableConfig {
    fn default() -> Self {
        Self {
            rho_u_max: 100.0,
            omega_cutoff: 30.0,
            target_rel_err: 1e-10,
        }
    }
}

/// Evaluator for `rho`, `omega` and their derivatives over a pair of tables.
#[derive(Debug, Clone)]
pub struct SpecialFunctions {
    rho: PiecewiseFunction,
    omega: PiecewiseFunction,
}

impl SpecialFunctions {
    pub fn new(config: &TableConfig) -> Result<Self> {
        Ok(Self {
            rho: PiecewiseFunction::dickman(config.rho_u_max, config.target_rel_err)?,
            omega: PiecewiseFunction::buchstab(config.omega_cutoff, config.target_rel_err)?,
        })
    }

    /// Wraps externally supplied tables after a structural check.
    pub fn from_tables(rho: PiecewiseFunction, omega: PiecewiseFunction) -> Result<Self> {
        rho.check_structure()?;
        omega.check_structure()?;
        if rho.kind != FunctionKind::Dickman || omega.kind != FunctionKind::Buchstab {
            return Err(Error::Format("table kinds must be (dickman, buchstab)".into()));
        }
        Ok(Self { rho, omega })
    }

    /// Shared tables built with the default configuration.
    pub fn standard() -> &'static SpecialFunctions {
        static TABLES: OnceLock<SpecialFunctions> = OnceLock::new();
        TABLES.get_or_init(|| {
            SpecialFunctions::new(&TableConfig::default()).expect("default tables build")
        })
    }

    pub fn rho_table(&self) -> &PiecewiseFunction {
        &self.rho
    }

    pub fn omega_table(&self) -> &PiecewiseFunction {
        &self.omega
    }

    pub fn omega_cutoff(&self) -> f64 {
        self.omega.u_max
    }

    /// Dickman function.
    pub fn rho(&self, u: f64) -> Result<f64> {
        ensure_finite("u", u)?;
        if u < 0.0 {
            return Ok(0.0);
        }
        let ceiling = self.rho.u_max;
        let value = if u <= ceiling {
            self.rho.eval(u).expect("u inside the table")
        } else {
            let at_ceiling = self.rho.eval(ceiling).expect("ceiling inside the table");
            if at_ceiling < RHO_UNDERFLOW {
                0.0
            } else {
                return Err(Error::Range {
                    what: "rho argument u",
                    value: u,
                    ceiling,
                });
            }
        };
        Ok(if value < RHO_UNDERFLOW { 0.0 } else { value })
    }

    /// `rho'(u) = -rho(u - 1)/u`, right-continuous at 1.
    pub fn rho_prime(&self, u: f64) -> Result<f64> {
        ensure_finite("u", u)?;
        if u <= 0.0 {
            return Err(Error::domain(format!("rho' is defined for u > 0, got {u}")));
        }
        Ok(-self.rho(u - 1.0)? / u)
    }

    /// `rho''(u) = (rho(u - 1) - u rho'(u - 1))/u^2` for `u > 1`.
    pub fn rho_double_prime(&self, u: f64) -> Result<f64> {
        ensure_finite("u", u)?;
        if u <= 1.0 {
            return Err(Error::domain(format!("rho'' is defined for u > 1, got {u}")));
        }
        let lagged = self.rho(u - 1.0)?;
        let lagged_prime = self.rho_prime(u - 1.0)?;
        Ok((lagged - u * lagged_prime) / (u * u))
    }

    /// Buchstab function; `e^-gamma` beyond the table cutoff.
    pub fn omega(&self, u: f64) -> Result<f64> {
        ensure_finite("u", u)?;
        if u < 1.0 {
            return Ok(0.0);
        }
        if u > self.omega.u_max {
            return Ok(EXP_NEG_GAMMA);
        }
        Ok(self.omega.eval(u).expect("u inside the table"))
    }

    /// `omega'(u) = (omega(u - 1) - omega(u))/u`, right-continuous at 1 and 2.
    pub fn omega_prime(&self, u: f64) -> Result<f64> {
        ensure_finite("u", u)?;
        if u < 1.0 {
            return Err(Error::domain(format!("omega' is defined for u >= 1, got {u}")));
        }
        Ok((self.omega(u - 1.0)? - self.omega(u)?) / u)
    }
}

const SCHEMA_TAG: &str = "smoothdiv.piecewise-function";
const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TableFile {
    schema: String,
    version: u32,
    table: PiecewiseFunction,
}

impl PiecewiseFunction {
    /// Serializes to the versioned JSON table format. Floats are written in
    /// shortest round-trip form, so export followed by import is bit-exact.
    pub fn to_json(&self) -> Result<String> {
        let file = TableFile {
            schema: SCHEMA_TAG.to_string(),
            version: SCHEMA_VERSION,
            table: self.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TableFile = serde_json::from_str(text)?;
        if file.schema != SCHEMA_TAG {
            return Err(Error::Format(format!("unexpected schema tag {:?}", file.schema)));
        }
        if file.version != SCHEMA_VERSION {
            return Err(Error::Format(format!(
                "unsupported table version {} (expected {SCHEMA_VERSION})",
                file.version
            )));
        }
        file.table.check_structure()?;
        Ok(file.table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sf() -> &'static SpecialFunctions {
        SpecialFunctions::standard()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn constants_are_consistent() {
        let c = Constants::STANDARD;
        assert!((c.exp_gamma * c.exp_neg_gamma - 1.0).abs() <= 2.0 * f64::EPSILON);
        assert!(close(c.euler_gamma.exp(), c.exp_gamma, 4.0 * f64::EPSILON));
    }

    #[test]
    fn rho_closed_forms() {
        assert_eq!(sf().rho(0.5).unwrap(), 1.0);
        assert_eq!(sf().rho(0.0).unwrap(), 1.0);
        assert_eq!(sf().rho(-1.0).unwrap(), 0.0);
        for u in [1.0, 1.25, 1.5, 1.999, 2.0] {
            assert!(close(sf().rho(u).unwrap(), 1.0 - f64::ln(u), 1e-13), "u={u}");
        }
    }

    #[test]
    fn rho_three_matches_step_halving_value() {
        // Frozen from the trapezoid oracle in tests/special_oracles.rs.
        assert!(close(sf().rho(3.0).unwrap(), 0.048_608_388_291_131_1, 1e-10));
    }

    #[test]
    fn rho_derivatives() {
        assert_eq!(sf().rho_prime(0.5).unwrap(), 0.0);
        assert_eq!(sf().rho_prime(1.0).unwrap(), -1.0);
        assert!(close(sf().rho_prime(1.5).unwrap(), -1.0 / 1.5, 1e-15));
        assert!(close(sf().rho_prime(2.5).unwrap(), -(1.0 - f64::ln(1.5)) / 2.5, 1e-13));
        assert!(close(sf().rho_double_prime(1.5).unwrap(), 1.0 / 2.25, 1e-15));
        let expect = ((1.0 - f64::ln(1.5)) + 2.5 / 1.5) / 6.25;
        assert!(close(sf().rho_double_prime(2.5).unwrap(), expect, 1e-13));
        assert!(sf().rho_double_prime(4.0).unwrap() > 0.0);
        assert!(matches!(sf().rho_prime(0.0), Err(Error::Domain(_))));
        assert!(matches!(sf().rho_double_prime(1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn omega_closed_forms() {
        assert_eq!(sf().omega(0.9).unwrap(), 0.0);
        assert!(close(sf().omega(1.7).unwrap(), 1.0 / 1.7, 1e-14));
        assert!(close(sf().omega(2.5).unwrap(), (1.0 + f64::ln(1.5)) / 2.5, 1e-13));
        assert!((sf().omega(20.0).unwrap() - EXP_NEG_GAMMA).abs() < 1e-9);
        assert_eq!(sf().omega(45.0).unwrap(), EXP_NEG_GAMMA);
    }

    #[test]
    fn omega_derivatives() {
        assert_eq!(sf().omega_prime(1.0).unwrap(), -1.0);
        assert!(close(sf().omega_prime(1.5).unwrap(), -(2.0 / 3.0) / 1.5, 1e-14));
        assert!(close(sf().omega_prime(2.0).unwrap(), 0.25, 1e-14));
        let expect = (1.0 / 1.5 - (1.0 + f64::ln(1.5)) / 2.5) / 2.5;
        assert!(close(sf().omega_prime(2.5).unwrap(), expect, 1e-12));
        assert!(sf().omega_prime(25.0).unwrap().abs() < 1e-9);
        assert!(matches!(sf().omega_prime(0.99), Err(Error::Domain(_))));
    }

    #[test]
    fn rho_range_handling() {
        // rho(100) is ~1e-229, below the reporting floor, so larger u underflow to 0.
        assert_eq!(sf().rho(100.0).unwrap(), 0.0);
        assert_eq!(sf().rho(150.0).unwrap(), 0.0);
        assert!(sf().rho(50.0).unwrap() > 0.0);
        let small = SpecialFunctions::new(&TableConfig {
            rho_u_max: 20.0,
            ..TableConfig::default()
        })
        .unwrap();
        match small.rho(25.0) {
            Err(Error::Range { ceiling, .. }) => assert_eq!(ceiling, 20.0),
            other => panic!("expected range error, got {other:?}"),
        }
        assert!(sf().rho(f64::NAN).is_err());
        assert!(sf().omega(f64::INFINITY).is_err());
    }

    #[test]
    fn certificates_within_target() {
        for t in [sf().rho_table(), sf().omega_table()] {
            assert!(t.max_certificate() <= t.target_rel_err(), "{:?}", t.kind());
            assert!(t.max_knot_jump() <= 10.0 * t.target_rel_err());
        }
    }

    #[test]
    fn impossible_target_fails_loudly() {
        let err = PiecewiseFunction::dickman(60.0, 1e-30).unwrap_err();
        assert!(matches!(err, Error::Construction(_)));
    }

    #[test]
    fn segment_integral_matches_closed_form() {
        // integral of 1 - log s over [1, 2] is 2 - 2 log 2
        let v = sf().rho_table().integral(1.0, 2.0).unwrap();
        assert!(close(v, 2.0 - 2.0 * f64::ln(2.0), 1e-14));
        let w = sf().omega_table().integral(1.0, 2.0).unwrap();
        assert!(close(w, f64::ln(2.0), 1e-14));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let t = PiecewiseFunction::dickman(12.0, 1e-10).unwrap();
        let text = t.to_json().unwrap();
        let back = PiecewiseFunction::from_json(&text).unwrap();
        assert_eq!(t, back);
        assert_eq!(text, back.to_json().unwrap());
    }

    #[test]
    fn json_rejects_wrong_schema() {
        let t = PiecewiseFunction::buchstab(5.0, 1e-10).unwrap();
        let text = t.to_json().unwrap().replace("\"version\": 1", "\"version\": 9");
        assert!(matches!(PiecewiseFunction::from_json(&text), Err(Error::Format(_))));
    }
}
