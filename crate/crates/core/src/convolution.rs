//! Tail integral of `rho` and the partial convolutions
//! `C_{f,g}(u, v) = int_v^inf f(u - s) g(s) ds` for `(f, g)` in
//! `{(omega, rho), (omega, rho'), (rho, rho)}`.
//!
//! The upper limit is clipped where the first factor vanishes: `omega(t) = 0`
//! for `t < 1` gives `s <= u - 1`, and `rho(t) = 0` for `t < 0` gives `s <= u`.
//! Each integral is split at every `s` where either factor changes its
//! piecewise definition before adaptive quadrature runs on the smooth pieces.

use serde::Serialize;

use crate::error::{ensure_finite, Result};
use crate::quad::{integrate_with_breaks, QuadratureSpec};
use crate::special::SpecialFunctions;
use crate::sum::NeumaierSum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvolutionValue {
    pub value: f64,
    pub est_abs_err: f64,
    /// Interval of `s` actually integrated over.
    pub effective_support: (f64, f64),
}

impl ConvolutionValue {
    fn empty(at: f64) -> Self {
        Self {
            value: 0.0,
            est_abs_err: 0.0,
            effective_support: (at, at),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Convolver<'a> {
    sf: &'a SpecialFunctions,
    spec: QuadratureSpec,
}

/// Breakpoints in `(lo, hi)`: integers (second factor) and `u - j` (first factor).
fn knots_between(lo: f64, hi: f64, u: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = lo.floor() + 1.0;
    while k < hi {
        out.push(k);
        k += 1.0;
    }
    // u - j in (lo, hi)  <=>  j in (u - hi, u - lo)
    let mut j = (u - hi).floor() + 1.0;
    while j < u - lo {
        let s = u - j;
        if s > lo && s < hi {
            out.push(s);
        }
        j += 1.0;
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

impl<'a> Convolver<'a> {
    pub fn new(sf: &'a SpecialFunctions, spec: QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self { sf, spec })
    }

    /// Default tables and tolerances.
    pub fn standard() -> Convolver<'static> {
        Convolver {
            sf: SpecialFunctions::standard(),
            spec: QuadratureSpec::default(),
        }
    }

    pub fn special(&self) -> &'a SpecialFunctions {
        self.sf
    }

    pub fn spec(&self) -> &QuadratureSpec {
        &self.spec
    }

    pub fn with_spec(&self, spec: QuadratureSpec) -> Result<Self> {
        Convolver::new(self.sf, spec)
    }

    fn rho(&self, s: f64) -> f64 {
        // callers check the range before integrating
        self.sf.rho(s).unwrap_or(0.0)
    }

    fn omega(&self, t: f64) -> f64 {
        self.sf.omega(t).unwrap_or(0.0)
    }

    /// `tau(v) = int_v^inf rho(s) ds`.
    pub fn tau(&self, v: f64) -> Result<f64> {
        self.tau_with_error(v).map(|c| c.value)
    }

    /// `tau(v)` together with its quadrature error estimate (truncation included).
    ///
    /// Integration proceeds one unit interval at a time and stops at the first
    /// integer `K` with `rho(K) (K + 1)/K < abs_tol/10`; that quantity bounds
    /// the remaining tail because `(K + j) rho(K + j) <= rho(K + j - 1)`.
    pub fn tau_with_error(&self, v: f64) -> Result<ConvolutionValue> {
        ensure_finite("v", v)?;
        let start = v.max(0.0);
        let ceiling = self.sf.rho_table().u_max();
        let mut lo = start;
        let mut value = NeumaierSum::new();
        let mut err = NeumaierSum::new();
        let f = |s: f64| self.rho(s);
        loop {
            let k = lo.floor() + 1.0;
            let rho_k = self.sf.rho(k.min(ceiling))?;
            let r = integrate_with_breaks(&f, lo, k, &[], &self.spec);
            value += r.value;
            err += r.abs_err;
            let tail = rho_k * (k + 1.0) / k;
            if tail < self.spec.abs_tol / 10.0 || k >= ceiling {
                err += tail;
                return Ok(ConvolutionValue {
                    value: value.value(),
                    est_abs_err: err.value(),
                    effective_support: (start, k),
                });
            }
            lo = k;
        }
    }

    /// `C_{omega,rho}(u, v)`, integrated over `s` in `[max(v, 0), u - 1]`.
    pub fn omega_rho(&self, u: f64, v: f64) -> Result<ConvolutionValue> {
        ensure_finite("u", u)?;
        ensure_finite("v", v)?;
        let lo = v.max(0.0);
        let hi = u - 1.0;
        if lo >= hi {
            return Ok(ConvolutionValue::empty(hi));
        }
        self.sf.rho(hi)?;
        let f = |s: f64| self.omega(u - s) * self.rho(s);
        let r = integrate_with_breaks(&f, lo, hi, &knots_between(lo, hi, u), &self.spec);
        Ok(ConvolutionValue {
            value: r.value,
            est_abs_err: r.abs_err,
            effective_support: (lo, hi),
        })
    }

    /// `C_{omega,rho'}(u, v)`. The part of the range below `s = 1` contributes
    /// nothing because `rho'` vanishes there, so it is skipped outright.
    pub fn omega_rho_prime(&self, u: f64, v: f64) -> Result<ConvolutionValue> {
        ensure_finite("u", u)?;
        ensure_finite("v", v)?;
        let lo = v.max(1.0);
        let hi = u - 1.0;
        if lo >= hi {
            return Ok(ConvolutionValue::empty(hi));
        }
        self.sf.rho(hi)?;
        let f = |s: f64| -self.omega(u - s) * self.rho(s - 1.0) / s;
        let r = integrate_with_breaks(&f, lo, hi, &knots_between(lo, hi, u), &self.spec);
        Ok(ConvolutionValue {
            value: r.value,
            est_abs_err: r.abs_err,
            effective_support: (lo, hi),
        })
    }

    /// `C_{rho,rho}(u, v)`, integrated over `s` in `[max(v, 0), u]`.
    pub fn rho_rho(&self, u: f64, v: f64) -> Result<ConvolutionValue> {
        ensure_finite("u", u)?;
        ensure_finite("v", v)?;
        let lo = v.max(0.0);
        let hi = u;
        if lo >= hi {
            return Ok(ConvolutionValue::empty(hi.max(lo)));
        }
        self.sf.rho(hi)?;
        let f = |s: f64| self.rho(u - s) * self.rho(s);
        let r = integrate_with_breaks(&f, lo, hi, &knots_between(lo, hi, u), &self.spec);
        Ok(ConvolutionValue {
            value: r.value,
            est_abs_err: r.abs_err,
            effective_support: (lo, hi),
        })
    }
}
