//! Globally adaptive Gauss-Kronrod (7/15) quadrature with explicit breakpoints.

// the node and weight tables keep their published digits
#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::NeumaierSum;

/// Kronrod abscissae on [0, 1]; odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnotPolicy {
    /// Pre-split at every point where a factor's piecewise definition changes.
    SplitAllIntegerKnots,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub knot_policy: KnotPolicy,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 200,
            knot_policy: KnotPolicy::SplitAllIntegerKnots,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::domain("quadrature tolerances must be positive"));
        }
        if self.max_subdivisions < 16 {
            return Err(Error::domain("max_subdivisions must be at least 16"));
        }
        Ok(())
    }

    /// Same spec with the absolute tolerance halved.
    pub fn tightened(&self) -> Self {
        Self {
            abs_tol: self.abs_tol / 2.0,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub intervals: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// One 15-point Kronrod evaluation with the QUADPACK error estimate.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let round_floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(round_floor);
    }
    (value, err)
}

/// Adaptive integration of `f` over `[a, b]` to `max(abs_tol, rel_tol |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> QuadResult {
    if b == a {
        return QuadResult {
            value: 0.0,
            abs_err: 0.0,
            intervals: 0,
            converged: true,
        };
    }
    let (value, err) = gk15(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value, err });
    let mut total = value;
    let mut total_err = err;
    let mut converged = total_err <= abs_tol.max(rel_tol * total.abs());
    while !converged && heap.len() < max_subdivisions {
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval can no longer be split in floating point
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(f, worst.a, mid);
        let (v2, e2) = gk15(f, mid, worst.b);
        heap.push(Piece { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, err: e2 });
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        converged = total_err <= abs_tol.max(rel_tol * total.abs());
    }
    // re-sum from the pieces in a fixed order so the result is reproducible
    let mut pieces: Vec<Piece> = heap.into_vec();
    pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value: NeumaierSum = pieces.iter().map(|p| p.value).collect();
    let err: NeumaierSum = pieces.iter().map(|p| p.err).collect();
    QuadResult {
        value: value.value(),
        abs_err: err.value(),
        intervals: pieces.len(),
        converged,
    }
}

/// Integrates over `[a, b]` after splitting at every breakpoint strictly inside.
///
/// The absolute tolerance is shared evenly between the resulting pieces.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> QuadResult {
    let mut points: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    points.push(a);
    points.extend(breaks.iter().copied().filter(|&p| p > a && p < b));
    points.push(b);
    points.sort_by(f64::total_cmp);
    points.dedup();
    let n = (points.len() - 1).max(1);
    let abs_tol = spec.abs_tol / n as f64;
    let mut value = NeumaierSum::new();
    let mut err = NeumaierSum::new();
    let mut intervals = 0;
    let mut converged = true;
    for w in points.windows(2) {
        let r = integrate(f, w[0], w[1], abs_tol, spec.rel_tol, spec.max_subdivisions);
        value += r.value;
        err += r.abs_err;
        intervals += r.intervals;
        converged &= r.converged;
    }
    QuadResult {
        value: value.value(),
        abs_err: err.value(),
        intervals,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_weights_sum_to_two() {
        let k: f64 = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        let g: f64 = 2.0 * WG[..3].iter().sum::<f64>() + WG[3];
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn single_rule_is_exact_for_low_degree() {
        // Kronrod-15 integrates degree 22 exactly; Gauss-7 degree 13.
        for deg in [0, 5, 13, 20, 22] {
            let (v, _) = gk15(&|x: f64| x.powi(deg), 0.0, 1.0);
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!((v - exact).abs() < 1e-15, "degree {deg}: {v} vs {exact}");
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = integrate(&|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10, 1e-12, 500);
        assert!((r.value - 2.0).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn breakpoints_resolve_kinks() {
        let f = |x: f64| (x - 0.3).abs() + (x - 0.7).abs();
        let spec = QuadratureSpec::default();
        let r = integrate_with_breaks(&f, 0.0, 1.0, &[0.3, 0.7], &spec);
        // each absolute value integrates to 0.045 + 0.245
        assert!((r.value - 0.58).abs() < 1e-14, "{}", r.value);
        assert_eq!(r.intervals, 3);
    }

    #[test]
    fn reports_reproducible_values() {
        let f = |x: f64| (10.0 * x).sin() * (-x).exp();
        let a = integrate(&f, 0.0, 5.0, 1e-13, 1e-13, 300);
        let b = integrate(&f, 0.0, 5.0, 1e-13, 1e-13, 300);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        let exact = {
            // int e^{-x} sin(10x) = [e^{-x}(-sin 10x - 10 cos 10x)/101]
            let g = |x: f64| (-x).exp() * (-(10.0 * x).sin() - 10.0 * (10.0 * x).cos()) / 101.0;
            g(5.0) - g(0.0)
        };
        assert!((a.value - exact).abs() < 1e-12);
        assert!(a.abs_err >= 0.0);
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::default().validate().is_ok());
        let bad = QuadratureSpec {
            max_subdivisions: 4,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
