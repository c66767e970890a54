//! Compensated floating-point accumulation.

use std::iter::FromIterator;
use std::ops::AddAssign;

/// Kahan-Babuska-Neumaier running sum.
#[derive(Debug, Default, Clone, Copy, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub const fn new() -> Self {
        Self { sum: 0.0, comp: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another partial sum into this one, keeping both compensation terms.
    pub fn merge(&mut self, other: &NeumaierSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl AddAssign<f64> for NeumaierSum {
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl Extend<f64> for NeumaierSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::new();
        s.extend(iter);
        s
    }
}

/// Running product carried as an unevaluated pair `hi + lo`.
///
/// Each step uses an fma to recover the rounding error of `hi * f`, so long
/// products of factors close to one lose almost nothing to rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompensatedProduct {
    hi: f64,
    lo: f64,
}

impl Default for CompensatedProduct {
    fn default() -> Self {
        Self { hi: 1.0, lo: 0.0 }
    }
}

impl CompensatedProduct {
    /// Multiplies by the double-double factor `f_hi + f_lo`.
    pub fn mul(&mut self, f_hi: f64, f_lo: f64) {
        let p = self.hi * f_hi;
        let e = self.hi.mul_add(f_hi, -p);
        let lo = self.lo.mul_add(f_hi, e) + self.hi * f_lo;
        let s = p + lo;
        self.lo = lo - (s - p);
        self.hi = s;
    }

    pub fn value(&self) -> f64 {
        self.hi + self.lo
    }

    pub fn parts(&self) -> (f64, f64) {
        (self.hi, self.lo)
    }
}
